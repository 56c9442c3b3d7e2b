// Copyright 2026 The qmlp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "qmlp/error.hpp"
#include "qmlp/log.hpp"
#include "qmlp/rng.hpp"
#include "qmlp/simulator.hpp"
#include "support/oracles.hpp"

namespace qmlp {
namespace {

using std::numbers::pi;

void expect_state_near(const StateVector& s, const oracle::CVec& ref, double tol) {
    ASSERT_EQ(s.dimension(), static_cast<std::size_t>(ref.size()));
    for (std::size_t i = 0; i < s.dimension(); ++i) {
        EXPECT_NEAR(s[i].real(), ref(i).real(), tol) << "i=" << i;
        EXPECT_NEAR(s[i].imag(), ref(i).imag(), tol) << "i=" << i;
    }
}

oracle::CVec to_vec(const StateVector& s) {
    oracle::CVec v(s.dimension());
    for (std::size_t i = 0; i < s.dimension(); ++i) {
        v(i) = s[i];
    }
    return v;
}

CircuitParams random_circuit(std::size_t u, std::size_t l, std::uint64_t seed) {
    CircuitParams c(u, l);
    CounterRng rng(seed, 11);
    for (double& a : c.angles()) {
        a = (2.0 * rng.uniform() - 1.0) * pi;
    }
    return c;
}

StateVector random_state(std::size_t u, std::uint64_t seed) {
    CounterRng rng(seed, 12);
    std::vector<Complex> amps(std::size_t{1} << u);
    double norm = 0.0;
    for (auto& a : amps) {
        a = {rng.normal(), rng.normal()};
        norm += std::norm(a);
    }
    for (auto& a : amps) {
        a /= std::sqrt(norm);
    }
    return StateVector::from_amplitudes(std::move(amps));
}

std::vector<double> to_std(std::span<const double> s) { return {s.begin(), s.end()}; }

// --- amplitude_encode -----------------------------------------------------

TEST(AmplitudeEncode, BasisVectorIsFixedPoint) {
    const std::vector<double> w{1, 0, 0, 0};
    const StateVector s = amplitude_encode(w, 2);
    EXPECT_EQ(s[0], Complex(1, 0));
    for (std::size_t i = 1; i < 4; ++i) {
        EXPECT_EQ(s[i], Complex(0, 0));
    }
}

TEST(AmplitudeEncode, SymmetricPair) {
    const std::vector<double> w{1, 1};
    const StateVector s = amplitude_encode(w, 1);
    EXPECT_NEAR(s[0].real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[1].real(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(AmplitudeEncode, ZeroPadsAndNormalizes) {
    const std::vector<double> w{3, 4, 0};
    const StateVector s = amplitude_encode(w, 2);
    const Eigen::Vector3d v(3, 4, 0);
    expect_state_near(s, oracle::encode(v, 2), 1e-15);
    EXPECT_NEAR(s[0].real(), 0.6, 1e-15);
    EXPECT_NEAR(s[1].real(), 0.8, 1e-15);
    EXPECT_EQ(s[3], Complex(0, 0));
}

TEST(AmplitudeEncode, RejectsTooFewQubits) {
    const std::vector<double> w{1, 2, 3, 4, 5};
    EXPECT_THROW(amplitude_encode(w, 2), DimensionError);
    EXPECT_THROW(amplitude_encode(w, 0), Error);
}

TEST(AmplitudeEncode, DegenerateInputFallsBackToZeroStateWithWarning) {
    set_quiet(true);
    const std::size_t before = warning_count();
    const std::vector<double> w{1e-14, 0, 0};
    const StateVector s = amplitude_encode(w, 2);
    EXPECT_EQ(s[0], Complex(1, 0));
    EXPECT_GT(warning_count(), before);
    set_quiet(false);
}

TEST(AmplitudeEncode, IdempotentOnNonNegativeStates) {
    CounterRng rng(4, 4);
    std::vector<double> w(8);
    for (double& x : w) {
        x = rng.uniform();
    }
    const StateVector s = amplitude_encode(w, 3);
    std::vector<double> amps;
    for (const auto& a : s.amplitudes()) {
        amps.push_back(a.real());
    }
    const StateVector again = amplitude_encode(amps, 3);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(again[i].real(), s[i].real(), 1e-15);
    }
}

TEST(StateVector, FromAmplitudesValidates) {
    EXPECT_THROW(StateVector::from_amplitudes({Complex(1, 0), Complex(1, 0)}), ValueError);
    EXPECT_THROW(StateVector::from_amplitudes({Complex(1, 0), Complex(0, 0), Complex(0, 0)}),
                 DimensionError);
}

// --- gates ----------------------------------------------------------------

TEST(ApplyGate, ZeroRotationIsIdentity) {
    const StateVector s = random_state(3, 1);
    const StateVector t = apply_gate(s, Gate::rx(1, 0.0));
    expect_state_near(t, to_vec(s), 0.0);
}

TEST(ApplyGate, CnotTruthTable) {
    // |10> -> |11>: index 2 -> 3 with qubit 0 as the high bit.
    const StateVector s = apply_gate(StateVector::basis(2, 2), Gate::cnot(0, 1));
    EXPECT_EQ(s[3], Complex(1, 0));
    for (std::size_t in = 0; in < 8; ++in) {
        const StateVector t = apply_gate(StateVector::basis(3, in), Gate::cnot(2, 0));
        oracle::CVec e = oracle::CVec::Zero(8);
        e(in) = 1.0;
        expect_state_near(t, oracle::cnot(2, 0, 3) * e, 0.0);
    }
}

TEST(ApplyGate, RxHalfPiMatchesMatrixExponential) {
    const StateVector s = apply_gate(StateVector(1), Gate::rx(0, pi / 2));
    oracle::CVec zero(2);
    zero << 1, 0;
    const oracle::CVec ref = oracle::rotation('X', pi / 2) * zero;
    expect_state_near(s, ref, 1e-15);
    EXPECT_NEAR(s[0].real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[1].imag(), -1 / std::sqrt(2.0), 1e-15);
}

TEST(ApplyGate, RotationMatricesMatchExponentialAndAreUnitary) {
    CounterRng rng(9, 9);
    for (int trial = 0; trial < 20; ++trial) {
        const double theta = (2 * rng.uniform() - 1) * 4 * pi;
        const std::pair<GateKind, char> kinds[] = {
            {GateKind::RX, 'X'}, {GateKind::RY, 'Y'}, {GateKind::RZ, 'Z'}};
        for (const auto& [kind, p] : kinds) {
            const Mat2 m = rotation_matrix(kind, theta);
            const oracle::CMat ref = oracle::rotation(p, theta);
            Eigen::Matrix2cd got;
            got << m[0], m[1], m[2], m[3];
            EXPECT_LT((got - ref).cwiseAbs().maxCoeff(), 1e-14);
            EXPECT_LT((got.adjoint() * got - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff(),
                      1e-14);
        }
    }
}

TEST(ApplyGate, MatchesEmbeddedDenseGateOnEveryQubit) {
    const StateVector s = random_state(4, 3);
    for (std::size_t q = 0; q < 4; ++q) {
        const StateVector t = apply_gate(s, Gate::ry(q, 0.37));
        expect_state_near(t, oracle::embed(oracle::rotation('Y', 0.37), q, 4) * to_vec(s), 1e-14);
        EXPECT_NEAR(t.norm(), 1.0, kNormTolerance);
    }
}

TEST(ApplyGate, RejectsBadIndices) {
    EXPECT_THROW(apply_gate(StateVector(2), Gate::rx(2, 0.1)), IndexError);
    EXPECT_THROW(apply_gate(StateVector(2), Gate::cnot(1, 1)), ValueError);
    EXPECT_THROW(apply_gate(StateVector(2), Gate::cnot(3, 0)), IndexError);
}

TEST(ApplyGate, NormPreservedOverLongSequences) {
    StateVector s = random_state(5, 8);
    CounterRng rng(8, 8);
    for (int i = 0; i < 500; ++i) {
        const std::size_t q = static_cast<std::size_t>(rng.uniform() * 5);
        const double a = rng.uniform() * 2 * pi;
        switch (i % 4) {
            case 0: s = apply_gate(s, Gate::rx(q, a)); break;
            case 1: s = apply_gate(s, Gate::ry(q, a)); break;
            case 2: s = apply_gate(s, Gate::rz(q, a)); break;
            default: s = apply_gate(s, Gate::cnot(q, (q + 1) % 5)); break;
        }
        ASSERT_LT(std::abs(s.norm() - 1.0), kNormTolerance);
    }
}

// --- run_circuit ----------------------------------------------------------

TEST(RunCircuit, ZeroAnglesKeepZeroState) {
    const CircuitParams c(2, 3);
    const StateVector s = run_circuit(StateVector(2), c);
    EXPECT_EQ(s[0], Complex(1, 0));
}

TEST(RunCircuit, TwoQubitsMatchDenseProduct) {
    const CircuitParams c = random_circuit(2, 1, 21);
    const StateVector in = random_state(2, 22);
    const oracle::CMat u = oracle::circuit_unitary(to_std(c.angles()), 2, 1);
    expect_state_near(run_circuit(in, c), u * to_vec(in), 1e-12);
}

TEST(RunCircuit, SingleQubitRotationsAdd) {
    CircuitParams c(1, 2);
    c.angle(0, 0, Axis::Alpha) = 0.4;
    c.angle(1, 0, Axis::Alpha) = -1.3;
    const StateVector s = run_circuit(StateVector(1), c);
    const StateVector ref = apply_gate(StateVector(1), Gate::rx(0, 0.4 - 1.3));
    expect_state_near(s, to_vec(ref), 1e-14);
}

TEST(RunCircuit, QubitMismatchThrows) {
    EXPECT_THROW(run_circuit(StateVector(3), CircuitParams(2, 1)), DimensionError);
}

TEST(RunCircuit, OracleEquivalenceAcrossRandomCircuits) {
    for (std::uint64_t t = 0; t < 30; ++t) {
        const std::size_t u = 1 + t % 4;
        const std::size_t l = 1 + (t * 7) % 6;
        const CircuitParams c = random_circuit(u, l, 100 + t);
        const StateVector in = random_state(u, 200 + t);
        const oracle::CVec ref = oracle::circuit_unitary(to_std(c.angles()), u, l) * to_vec(in);
        expect_state_near(run_circuit(in, c), ref, 1e-10);
    }
}

TEST(RunCircuit, ChainEntanglerAndReversedOrder) {
    CircuitParams chain(3, 2, Entangler::Chain);
    CircuitParams rev(3, 2, Entangler::Ring, RotationOrder::ZYX);
    CounterRng rng(5, 5);
    for (std::size_t i = 0; i < chain.num_angles(); ++i) {
        chain.angles()[i] = rev.angles()[i] = rng.uniform() * 2 * pi;
    }
    EXPECT_EQ(chain.entangler_pairs().size(), 2U);
    // The library's own oracle honours both options; check it agrees with run_circuit.
    for (const CircuitParams* c : {&chain, &rev}) {
        const StateVector s = run_circuit(StateVector(3), *c);
        const Eigen::VectorXcd ref = dense_unitary_oracle(*c).col(0);
        expect_state_near(s, ref, 1e-12);
    }
}

// --- expectations and sampling -------------------------------------------

TEST(ExpectationZ, BasisAndSuperposition) {
    EXPECT_EQ(expectation_z(StateVector::basis(1, 0), 0), 1.0);
    EXPECT_EQ(expectation_z(StateVector::basis(1, 1), 0), -1.0);
    const StateVector plus = apply_gate(StateVector(1), Gate::ry(0, pi / 2));
    EXPECT_NEAR(expectation_z(plus, 0), 0.0, 1e-15);
    EXPECT_THROW(expectation_z(plus, 1), IndexError);
}

TEST(ExpectationZ, MatchesObservableOracleAndBounds) {
    for (std::uint64_t t = 0; t < 10; ++t) {
        const StateVector s = random_state(4, t);
        const Eigen::VectorXd ref = oracle::expectations(to_vec(s), 4);
        const auto e = expectations_z(s);
        for (std::size_t q = 0; q < 4; ++q) {
            EXPECT_NEAR(e[q], ref(q), 1e-14);
            EXPECT_LE(std::abs(e[q]), 1.0);
        }
    }
}

TEST(SampleExpectation, DeterministicOutcomes) {
    EXPECT_EQ(sample_expectation_z(StateVector::basis(1, 0), 0, 17, 3), 1.0);
    EXPECT_EQ(sample_expectation_z(StateVector::basis(1, 1), 0, 1, 3), -1.0);
    EXPECT_THROW(sample_expectation_z(StateVector(1), 0, 0, 3), ValueError);
}

TEST(SampleExpectation, EqualSuperpositionWithinFourStandardErrors) {
    const StateVector plus = apply_gate(StateVector(1), Gate::ry(0, pi / 2));
    std::size_t inside = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        inside += std::abs(sample_expectation_z(plus, 0, 4096, seed)) <= 0.0625 ? 1 : 0;
    }
    EXPECT_GE(inside, 198U);
}

TEST(SampleExpectation, ReproducibleAndSeedSensitive) {
    const StateVector s = random_state(3, 5);
    EXPECT_EQ(sample_expectation_z(s, 1, 1000, 42), sample_expectation_z(s, 1, 1000, 42));
    std::set<double> distinct;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        distinct.insert(sample_expectation_z(s, 1, 1000, seed));
    }
    EXPECT_GE(distinct.size(), 5U);
    const double v = sample_expectation_z(s, 1, 999, 1);
    // (n+ - n-)/n is a multiple of 2/n.
    const double k = (v + 1.0) * 999 / 2.0;
    EXPECT_NEAR(k, std::round(k), 1e-9);
}

TEST(Measure, ModesReportShots) {
    const StateVector s = random_state(2, 6);
    const MeasurementResult exact = measure(s, MeasurementMode::Exact);
    EXPECT_EQ(exact.expectations, expectations_z(s));
    const MeasurementResult sampled = measure(s, MeasurementMode::Sampled, 64, 1);
    EXPECT_EQ(sampled.shots, 64U);
    for (double e : sampled.expectations) {
        EXPECT_LE(std::abs(e), 1.0);
    }
}

// --- dense oracle and differentiation -------------------------------------

TEST(DenseOracle, IdentityAndUnitarity) {
    EXPECT_LT((dense_unitary_oracle(CircuitParams(1, 1)) - Eigen::Matrix2cd::Identity())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
    const Eigen::MatrixXcd m = dense_unitary_oracle(random_circuit(3, 2, 3));
    EXPECT_LT((m.adjoint() * m - Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_THROW(dense_unitary_oracle(CircuitParams(7, 1)), ValueError);
}

TEST(DenseOracle, AgreesWithIndependentConstruction) {
    const CircuitParams c = random_circuit(3, 3, 31);
    const oracle::CMat ref = oracle::circuit_unitary(to_std(c.angles()), 3, 3);
    EXPECT_LT((dense_unitary_oracle(c) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AdjointJacobian, MatchesParameterShift) {
    const CircuitParams c = random_circuit(3, 2, 41);
    const StateVector in = random_state(3, 42);
    const Eigen::MatrixXd adj = expectation_jacobian(in, c);
    ASSERT_EQ(adj.rows(), 3);
    ASSERT_EQ(adj.cols(), static_cast<Eigen::Index>(c.num_angles()));
    for (std::size_t p = 0; p < c.num_angles(); ++p) {
        CircuitParams plus = c, minus = c;
        plus.angles()[p] += pi / 2;
        minus.angles()[p] -= pi / 2;
        const auto ep = expectations_z(run_circuit(in, plus));
        const auto em = expectations_z(run_circuit(in, minus));
        for (std::size_t q = 0; q < 3; ++q) {
            EXPECT_NEAR(adj(q, p), (ep[q] - em[q]) / 2, 1e-12);
        }
    }
}

TEST(AdjointVjp, InputGradientMatchesFiniteDifference) {
    const CircuitParams c = random_circuit(2, 2, 51);
    const std::vector<double> w{0.3, -0.2, 0.8, 0.5};
    const std::vector<double> cot{0.7, -1.1};
    std::vector<double> input_grad;
    adjoint_vjp(amplitude_encode(w, 2), c, cot, &input_grad);
    ASSERT_EQ(input_grad.size(), 4U);
    // Gradient w.r.t. the raw amplitudes (before renormalization): perturb the
    // state directly without re-normalizing.
    for (std::size_t i = 0; i < 4; ++i) {
        auto value = [&](double delta) {
            const StateVector s = amplitude_encode(w, 2);
            std::vector<Complex> amps(s.amplitudes().begin(), s.amplitudes().end());
            amps[i] += delta;
            oracle::CVec v(4);
            for (std::size_t k = 0; k < 4; ++k) {
                v(k) = amps[k];
            }
            const oracle::CVec out = oracle::circuit_unitary(to_std(c.angles()), 2, 2) * v;
            double total = 0.0;
            for (std::size_t q = 0; q < 2; ++q) {
                total += cot[q] * (out.adjoint() * oracle::z_observable(q, 2) * out)(0, 0).real();
            }
            return total;
        };
        EXPECT_NEAR(input_grad[i], (value(1e-6) - value(-1e-6)) / 2e-6, 1e-7);
    }
}

TEST(ExecutionCounter, CountsCircuitRuns) {
    const std::uint64_t before = circuit_execution_count();
    run_circuit(StateVector(2), CircuitParams(2, 1));
    EXPECT_EQ(circuit_execution_count(), before + 1);
}

}  // namespace
}  // namespace qmlp
