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

#include <gtest/gtest.h>

#include "qmlp/error.hpp"
#include "qmlp/noise.hpp"
#include "qmlp/rng.hpp"
#include "support/oracles.hpp"

namespace qmlp {
namespace {

using std::numbers::pi;

CircuitParams random_circuit(std::size_t u, std::size_t l, std::uint64_t seed) {
    CircuitParams c(u, l);
    CounterRng rng(seed, 21);
    for (double& a : c.angles()) {
        a = (2.0 * rng.uniform() - 1.0) * pi;
    }
    return c;
}

StateVector random_state(std::size_t u, std::uint64_t seed) {
    CounterRng rng(seed, 22);
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

Eigen::MatrixXcd random_rho(std::size_t u, std::uint64_t seed) {
    CounterRng rng(seed, 23);
    const Eigen::Index d = Eigen::Index{1} << u;
    Eigen::MatrixXcd a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            a(i, j) = {rng.normal(), rng.normal()};
        }
    }
    Eigen::MatrixXcd rho = a * a.adjoint();
    return rho / rho.trace();
}

oracle::CVec to_vec(const StateVector& s) {
    oracle::CVec v(s.dimension());
    for (std::size_t i = 0; i < s.dimension(); ++i) {
        v(i) = s[i];
    }
    return v;
}

std::vector<double> angles_of(const CircuitParams& c) { return {c.angles().begin(), c.angles().end()}; }

// --- Kraus sets -----------------------------------------------------------

TEST(Kraus, AmplitudeDampingZeroIsIdentity) {
    const KrausSet k = kraus_amplitude_damping(0.0);
    ASSERT_EQ(k.operators.size(), 2U);
    EXPECT_EQ(k.operators[0], (Mat2{1, 0, 0, 1}));
    EXPECT_EQ(k.operators[1], (Mat2{0, 0, 0, 0}));
}

TEST(Kraus, CompletenessForRandomRates) {
    CounterRng rng(1, 1);
    for (int i = 0; i < 100; ++i) {
        EXPECT_LT(kraus_amplitude_damping(rng.uniform()).completeness_error(), 1e-12);
        EXPECT_LT(kraus_phase_damping(rng.uniform()).completeness_error(), 1e-12);
    }
    EXPECT_LT(kraus_amplitude_damping(1.0).completeness_error(), 1e-12);
    EXPECT_LT(kraus_phase_damping(1.0).completeness_error(), 1e-12);
}

TEST(Kraus, RatesOutOfRangeThrow) {
    EXPECT_THROW(kraus_amplitude_damping(-0.1), ValueError);
    EXPECT_THROW(kraus_amplitude_damping(1.1), ValueError);
    EXPECT_THROW(kraus_phase_damping(std::nan("")), ValueError);
    EXPECT_THROW((NoiseSpec{0.2, 2.0}).validate(), ValueError);
}

TEST(Kraus, FullAmplitudeDampingRelaxesOne) {
    const DensityMatrix one = DensityMatrix::from_state(StateVector::basis(1, 1));
    const DensityMatrix out = apply_channel_density(one, kraus_amplitude_damping(1.0), 0);
    EXPECT_NEAR(out(0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(out(1, 1).real(), 0.0, 1e-15);
}

TEST(Kraus, SmallAmplitudeDampingPopulation) {
    const DensityMatrix one = DensityMatrix::from_state(StateVector::basis(1, 1));
    const DensityMatrix out = apply_channel_density(one, kraus_amplitude_damping(0.01), 0);
    Eigen::Matrix2cd rho;
    rho << 0, 0, 0, 1;
    const Eigen::MatrixXcd ref = oracle::apply_channel(rho, oracle::amplitude_damping(0.01), 0, 1);
    EXPECT_NEAR(out(1, 1).real(), 0.99, 1e-15);
    EXPECT_NEAR(out(1, 1).real(), ref(1, 1).real(), 1e-15);
}

TEST(Kraus, PhaseDampingKeepsPopulations) {
    Eigen::Matrix2cd diag;
    diag << 0.3, 0, 0, 0.7;
    const DensityMatrix rho = DensityMatrix::from_matrix(diag);
    for (double p : {0.0, 0.25, 1.0}) {
        const DensityMatrix out = apply_channel_density(rho, kraus_phase_damping(p), 0);
        EXPECT_LT((out.to_matrix() - diag).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Kraus, PhaseDampingHalfScalesCoherence) {
    const DensityMatrix plus =
        DensityMatrix::from_state(apply_gate(StateVector(1), Gate::ry(0, pi / 2)));
    const DensityMatrix out = apply_channel_density(plus, kraus_phase_damping(0.5), 0);
    Eigen::Matrix2cd p;
    p << 0.5, 0.5, 0.5, 0.5;
    const Eigen::MatrixXcd ref = oracle::apply_channel(p, oracle::phase_damping(0.5), 0, 1);
    EXPECT_NEAR(out(0, 1).real(), 0.5 * std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(out(0, 1).real(), ref(0, 1).real(), 1e-15);
    EXPECT_NEAR(out(0, 0).real(), 0.5, 1e-15);
}

// --- density channels -----------------------------------------------------

TEST(DensityChannel, IdentityChannelLeavesStateUnchanged) {
    const DensityMatrix rho = DensityMatrix::from_matrix(random_rho(3, 1));
    const DensityMatrix out = apply_channel_density(rho, kraus_phase_damping(0.0), 1);
    EXPECT_LT((out.to_matrix() - rho.to_matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DensityChannel, FullRelaxationOnEveryQubit) {
    DensityMatrix rho = DensityMatrix::from_matrix(random_rho(3, 2));
    for (std::size_t q = 0; q < 3; ++q) {
        rho = apply_channel_density(rho, kraus_amplitude_damping(1.0), q);
    }
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(8, 8);
    ref(0, 0) = 1.0;
    EXPECT_LT((rho.to_matrix() - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DensityChannel, MatchesKrausSumOracleAndPreservesTrace) {
    const Eigen::MatrixXcd r = random_rho(2, 3);
    const DensityMatrix out = apply_channel_density(DensityMatrix::from_matrix(r),
                                                    kraus_amplitude_damping(0.3), 1);
    const Eigen::MatrixXcd ref = oracle::apply_channel(r, oracle::amplitude_damping(0.3), 1, 2);
    EXPECT_LT((out.to_matrix() - ref).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-12);
    EXPECT_NEAR(out.trace().imag(), 0.0, 1e-12);
    EXPECT_LT(out.hermiticity_error(), 1e-12);
    EXPECT_GE(out.min_eigenvalue(), -1e-10);
}

TEST(DensityChannel, AmplitudeDampingNeverRaisesExcitedPopulation) {
    CounterRng rng(6, 6);
    for (std::uint64_t t = 0; t < 20; ++t) {
        const DensityMatrix rho = DensityMatrix::from_matrix(random_rho(3, 10 + t));
        const std::size_t q = t % 3;
        const DensityMatrix out = apply_channel_density(rho, kraus_amplitude_damping(rng.uniform()), q);
        // <Z> rises exactly when the |1> population of the marginal falls.
        EXPECT_GE(out.expectation_z(q), rho.expectation_z(q) - 1e-14);
    }
}

TEST(DensityChannel, SizeGuard) {
    EXPECT_THROW(DensityMatrix(11), ValueError);
    EXPECT_THROW(apply_channel_density(DensityMatrix(2), kraus_phase_damping(0.1), 2), IndexError);
}

TEST(DensityMatrix, FromMatrixValidates) {
    Eigen::Matrix2cd bad;
    bad << 0.5, 0.1, 0.2, 0.5;
    EXPECT_THROW(DensityMatrix::from_matrix(bad), ValueError);
    Eigen::Matrix2cd trace2;
    trace2 << 1.0, 0, 0, 1.0;
    EXPECT_THROW(DensityMatrix::from_matrix(trace2), ValueError);
}

TEST(DensityGates, MatchUnitaryConjugation) {
    const Eigen::MatrixXcd r = random_rho(3, 4);
    const DensityMatrix rho = DensityMatrix::from_matrix(r);
    const DensityMatrix a = apply_gate_density(rho, Gate::rx(2, 0.7));
    const oracle::CMat g = oracle::embed(oracle::rotation('X', 0.7), 2, 3);
    EXPECT_LT((a.to_matrix() - g * r * g.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    const DensityMatrix b = apply_gate_density(rho, Gate::cnot(1, 0));
    const oracle::CMat c = oracle::cnot(1, 0, 3);
    EXPECT_LT((b.to_matrix() - c * r * c.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DensityCircuit, MatchesLayerByLayerOracle) {
    const CircuitParams c = random_circuit(3, 2, 5);
    const Eigen::MatrixXcd r = random_rho(3, 5);
    const DensityMatrix out =
        run_circuit_density(DensityMatrix::from_matrix(r), c, NoiseSpec{0.05, 0.08});
    const oracle::CMat ref = oracle::noisy_circuit(r, angles_of(c), 3, 2, 0.05, 0.08);
    EXPECT_LT((out.to_matrix() - ref).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-12);
    EXPECT_LT(out.hermiticity_error(), 1e-12);
}

// --- noisy expectations ---------------------------------------------------

TEST(NoisyExpectations, ZeroNoiseIsBitIdenticalToNoiseless) {
    const CircuitParams c = random_circuit(4, 3, 6);
    const StateVector in = random_state(4, 6);
    const auto ref = expectations_z(run_circuit(in, c));
    for (NoiseMethod m : {NoiseMethod::Auto, NoiseMethod::Density, NoiseMethod::Trajectory}) {
        EXPECT_EQ(noisy_expectations(in, c, {}, m, 10, 1).values, ref);
    }
}

TEST(NoisyExpectations, DensityMatchesOracle) {
    const CircuitParams c = random_circuit(3, 3, 7);
    const StateVector in = random_state(3, 7);
    const oracle::CVec v = to_vec(in);
    const oracle::CMat rho = oracle::noisy_circuit(v * v.adjoint(), angles_of(c), 3, 3, 0.02, 0.03);
    const Eigen::VectorXd ref = oracle::density_expectations(rho, 3);
    const auto got = noisy_expectations(in, c, {0.02, 0.03}, NoiseMethod::Density).values;
    for (std::size_t q = 0; q < 3; ++q) {
        EXPECT_NEAR(got[q], ref(q), 1e-13);
    }
}

TEST(NoisyExpectations, TrajectoriesConvergeToDensity) {
    const CircuitParams c = random_circuit(2, 2, 8);
    const StateVector in = StateVector(2);
    const NoiseSpec noise{0.01, 0.01};
    const auto exact = noisy_expectations(in, c, noise, NoiseMethod::Density).values;
    const NoisyExpectations traj = noisy_expectations(in, c, noise, NoiseMethod::Trajectory, 20000, 3);
    EXPECT_EQ(traj.trajectories, 20000U);
    for (std::size_t q = 0; q < 2; ++q) {
        EXPECT_LT(std::abs(traj.values[q] - exact[q]), 0.02);
        EXPECT_GT(traj.standard_errors[q], 0.0);
    }
}

TEST(NoisyExpectations, StrongNoiseTrajectoriesWithinStandardErrors) {
    const CircuitParams c = random_circuit(3, 2, 9);
    const StateVector in = random_state(3, 9);
    const NoiseSpec noise{0.3, 0.2};
    const auto exact = noisy_expectations(in, c, noise, NoiseMethod::Density).values;
    const NoisyExpectations traj = noisy_expectations(in, c, noise, NoiseMethod::Trajectory, 20000, 4);
    for (std::size_t q = 0; q < 3; ++q) {
        EXPECT_LT(std::abs(traj.values[q] - exact[q]), 4.5 * traj.standard_errors[q]);
    }
}

TEST(NoisyExpectations, FullDampingRelaxesToPlusOne) {
    const CircuitParams c = random_circuit(3, 2, 10);
    for (NoiseMethod m : {NoiseMethod::Density, NoiseMethod::Trajectory}) {
        for (double e : noisy_expectations(random_state(3, 10), c, {1.0, 0.0}, m, 50, 1).values) {
            EXPECT_NEAR(e, 1.0, 1e-12);
        }
    }
}

TEST(NoisyExpectations, MethodAndSizeErrors) {
    const CircuitParams c(3, 1);
    EXPECT_THROW(noisy_expectations(StateVector(3), c, {0.1, 0.1}, NoiseMethod::Trajectory, 0),
                 ValueError);
    EXPECT_THROW(noisy_expectations(StateVector(11), CircuitParams(11, 1), {0.1, 0.1},
                                    NoiseMethod::Density),
                 ValueError);
    EXPECT_THROW(noisy_expectations(StateVector(2), c, {}), DimensionError);
}

TEST(NoisyExpectations, TrajectoriesReproducible) {
    const CircuitParams c = random_circuit(3, 2, 11);
    const NoiseSpec noise{0.1, 0.1};
    const auto a = noisy_expectations(StateVector(3), c, noise, NoiseMethod::Trajectory, 300, 5);
    const auto b = noisy_expectations(StateVector(3), c, noise, NoiseMethod::Trajectory, 300, 5);
    EXPECT_EQ(a.values, b.values);
}

// --- gradients under noise -----------------------------------------------

TEST(NoisyGradients, AdjointMatchesParameterShift) {
    const CircuitParams c = random_circuit(3, 2, 12);
    const StateVector in = random_state(3, 12);
    for (const NoiseSpec noise : {NoiseSpec{}, NoiseSpec{0.01, 0.01}, NoiseSpec{0.2, 0.1}}) {
        const Eigen::MatrixXd adj = adjoint_jacobian(in, c, noise);
        const Eigen::MatrixXd shift = parameter_shift_jacobian(in, c, noise);
        EXPECT_LT((adj - shift).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(NoisyGradients, ShiftRuleMatchesDensityOracleDifferences) {
    const CircuitParams c = random_circuit(2, 2, 13);
    const StateVector in = random_state(2, 13);
    const oracle::CVec v = to_vec(in);
    const Eigen::MatrixXd shift = parameter_shift_jacobian(in, c, {0.05, 0.05});
    auto angles = angles_of(c);
    for (std::size_t p = 0; p < angles.size(); ++p) {
        auto plus = angles, minus = angles;
        plus[p] += 1e-5;
        minus[p] -= 1e-5;
        const Eigen::VectorXd ep = oracle::density_expectations(
            oracle::noisy_circuit(v * v.adjoint(), plus, 2, 2, 0.05, 0.05), 2);
        const Eigen::VectorXd em = oracle::density_expectations(
            oracle::noisy_circuit(v * v.adjoint(), minus, 2, 2, 0.05, 0.05), 2);
        for (std::size_t q = 0; q < 2; ++q) {
            EXPECT_NEAR(shift(q, p), (ep(q) - em(q)) / 2e-5, 1e-8);
        }
    }
}

TEST(BatchVjp, DensityPathMatchesCotangentContraction) {
    const CircuitParams c = random_circuit(3, 2, 14);
    std::vector<StateVector> states{random_state(3, 1), random_state(3, 2)};
    Eigen::MatrixXd cot(3, 2);
    cot << 0.3, -0.1, 0.5, 0.9, -0.4, 0.2;
    const NoiseSpec noise{0.02, 0.04};
    const BatchVjp vjp = batch_vjp(states, cot, c, noise, true);
    std::vector<double> ref(c.num_angles(), 0.0);
    for (std::size_t k = 0; k < 2; ++k) {
        const Eigen::MatrixXd jac = parameter_shift_jacobian(states[k], c, noise);
        for (std::size_t p = 0; p < c.num_angles(); ++p) {
            ref[p] += cot.col(static_cast<Eigen::Index>(k)).dot(jac.col(static_cast<Eigen::Index>(p)));
        }
    }
    for (std::size_t p = 0; p < ref.size(); ++p) {
        EXPECT_NEAR(vjp.angle_grad[p], ref[p], 1e-11);
    }
    ASSERT_EQ(vjp.state_grads.size(), 2U);
    // State gradient against differences of the density oracle.
    const std::vector<double> angles = angles_of(c);
    for (std::size_t i = 0; i < 8; ++i) {
        auto value = [&](double delta) {
            oracle::CVec v = to_vec(states[0]);
            v(static_cast<Eigen::Index>(i)) += delta;
            const Eigen::VectorXd e =
                oracle::density_expectations(oracle::noisy_circuit(v * v.adjoint(), angles, 3, 2, 0.02, 0.04), 3);
            return cot.col(0).dot(e);
        };
        EXPECT_NEAR(vjp.state_grads[0][i], (value(1e-6) - value(-1e-6)) / 2e-6, 1e-7);
    }
}

TEST(BatchExpectations, MatchesPerStateDensity) {
    const CircuitParams c = random_circuit(3, 2, 15);
    std::vector<StateVector> states{random_state(3, 3), random_state(3, 4), StateVector(3)};
    const NoiseSpec noise{0.01, 0.02};
    const Eigen::MatrixXd e = batch_expectations(states, c, noise);
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto ref = noisy_expectations(states[k], c, noise, NoiseMethod::Density).values;
        for (std::size_t q = 0; q < 3; ++q) {
            EXPECT_NEAR(e(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k)), ref[q], 1e-13);
        }
    }
}

}  // namespace
}  // namespace qmlp
