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

#include "qmlp/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qmlp/detail/state_access.hpp"
#include "qmlp/error.hpp"
#include "qmlp/log.hpp"
#include "qmlp/rng.hpp"

namespace qmlp {
namespace {

std::atomic<std::uint64_t> g_executions{0};

constexpr std::size_t kMaxQubits = 30;

std::size_t bit_mask(std::size_t num_qubits, std::size_t qubit) {
    return std::size_t{1} << (num_qubits - 1 - qubit);
}

void check_qubit(std::size_t num_qubits, std::size_t qubit) {
    if (qubit >= num_qubits) {
        throw IndexError("qubit index " + std::to_string(qubit) + " out of range for " +
                         std::to_string(num_qubits) + " qubits");
    }
}

void apply_gate_inplace(std::vector<Complex>& v, std::size_t num_qubits, const Gate& gate) {
    if (gate.kind == GateKind::CNOT) {
        kernels::apply_cnot(v, num_qubits, *gate.control, gate.target);
    } else {
        kernels::apply_1q(v, num_qubits, gate.target, rotation_matrix(gate.kind, gate.angle));
    }
}

void apply_gate_adjoint_inplace(std::vector<Complex>& v, std::size_t num_qubits,
                                const Gate& gate) {
    if (gate.kind == GateKind::CNOT) {
        kernels::apply_cnot(v, num_qubits, *gate.control, gate.target);
    } else {
        kernels::apply_1q(v, num_qubits, gate.target, rotation_matrix(gate.kind, -gate.angle));
    }
}

// <a| P_q |b> for a Pauli P on qubit q.
Complex pauli_matrix_element(const std::vector<Complex>& a, const std::vector<Complex>& b,
                             std::size_t num_qubits, std::size_t qubit, GateKind kind) {
    const std::size_t mask = bit_mask(num_qubits, qubit);
    const Mat2 p = pauli_matrix(kind);
    Complex acc{0.0, 0.0};
    for (std::size_t hi = 0; hi < b.size(); hi += 2 * mask) {
        for (std::size_t i0 = hi; i0 < hi + mask; ++i0) {
            const std::size_t i1 = i0 | mask;
            const Complex pb0 = p[0] * b[i0] + p[1] * b[i1];
            const Complex pb1 = p[2] * b[i0] + p[3] * b[i1];
            acc += std::conj(a[i0]) * pb0 + std::conj(a[i1]) * pb1;
        }
    }
    return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(std::size_t num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
        throw ValueError("number of qubits must be in [1, 30], got " + std::to_string(num_qubits));
    }
    amplitudes_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = 1.0;
}

StateVector::StateVector(std::size_t num_qubits, std::vector<Complex> amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t n = amplitudes.size();
    if (n < 2 || (n & (n - 1)) != 0) {
        throw DimensionError("amplitude count must be a power of two >= 2, got " +
                             std::to_string(n));
    }
    const auto num_qubits = static_cast<std::size_t>(std::countr_zero(n));
    StateVector s(num_qubits, std::move(amplitudes));
    if (std::abs(s.norm() - 1.0) > kNormTolerance) {
        throw ValueError("amplitudes are not normalized (norm " + std::to_string(s.norm()) + ")");
    }
    return s;
}

StateVector StateVector::basis(std::size_t num_qubits, std::size_t index) {
    StateVector s(num_qubits);
    if (index >= s.dimension()) {
        throw IndexError("basis index " + std::to_string(index) + " out of range");
    }
    s.amplitudes_[0] = 0.0;
    s.amplitudes_[index] = 1.0;
    return s;
}

double StateVector::norm() const {
    double acc = 0.0;
    for (const auto& a : amplitudes_) {
        acc += std::norm(a);
    }
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Gates

void Gate::validate(std::size_t num_qubits) const {
    check_qubit(num_qubits, target);
    if (kind == GateKind::CNOT) {
        if (!control) {
            throw ValueError("CNOT requires a control qubit");
        }
        check_qubit(num_qubits, *control);
        if (*control == target) {
            throw ValueError("CNOT control and target must differ");
        }
    } else if (control) {
        throw ValueError("rotation gates take no control qubit");
    }
}

Mat2 rotation_matrix(GateKind kind, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    switch (kind) {
        case GateKind::RX:
            return {Complex{c, 0}, Complex{0, -s}, Complex{0, -s}, Complex{c, 0}};
        case GateKind::RY:
            return {Complex{c, 0}, Complex{-s, 0}, Complex{s, 0}, Complex{c, 0}};
        case GateKind::RZ:
            return {Complex{c, -s}, Complex{0, 0}, Complex{0, 0}, Complex{c, s}};
        case GateKind::CNOT:
            break;
    }
    throw ValueError("CNOT has no rotation matrix");
}

Mat2 pauli_matrix(GateKind kind) {
    switch (kind) {
        case GateKind::RX:
            return {Complex{0, 0}, Complex{1, 0}, Complex{1, 0}, Complex{0, 0}};
        case GateKind::RY:
            return {Complex{0, 0}, Complex{0, -1}, Complex{0, 1}, Complex{0, 0}};
        case GateKind::RZ:
            return {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{-1, 0}};
        case GateKind::CNOT:
            break;
    }
    throw ValueError("CNOT has no Pauli generator");
}

// ---------------------------------------------------------------------------
// CircuitParams

CircuitParams::CircuitParams(std::size_t num_qubits, std::size_t depth, Entangler entangler,
                             RotationOrder order)
    : num_qubits_(num_qubits), depth_(depth), entangler_(entangler), order_(order) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
        throw ValueError("circuit qubit count must be in [1, 30]");
    }
    if (depth == 0) {
        throw ValueError("circuit depth must be >= 1");
    }
    angles_.assign(3 * num_qubits * depth, 0.0);
}

double& CircuitParams::angle(std::size_t layer, std::size_t qubit, Axis axis) {
    return angles_.at(angle_index(num_qubits_, layer, qubit, axis));
}

double CircuitParams::angle(std::size_t layer, std::size_t qubit, Axis axis) const {
    return angles_.at(angle_index(num_qubits_, layer, qubit, axis));
}

std::vector<std::pair<std::size_t, std::size_t>> CircuitParams::entangler_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (num_qubits_ < 2 || entangler_ == Entangler::None) {
        return pairs;
    }
    const std::size_t count = entangler_ == Entangler::Ring ? num_qubits_ : num_qubits_ - 1;
    for (std::size_t u = 0; u < count; ++u) {
        pairs.emplace_back(u, (u + 1) % num_qubits_);
    }
    return pairs;
}

std::vector<TapeEntry> CircuitParams::tape() const {
    static constexpr std::array<GateKind, 3> kXyz{GateKind::RX, GateKind::RY, GateKind::RZ};
    static constexpr std::array<GateKind, 3> kZyx{GateKind::RZ, GateKind::RY, GateKind::RX};
    const auto& order = order_ == RotationOrder::XYZ ? kXyz : kZyx;
    const auto pairs = entangler_pairs();

    std::vector<TapeEntry> tape;
    tape.reserve(depth_ * (3 * num_qubits_ + pairs.size()));
    for (std::size_t l = 0; l < depth_; ++l) {
        for (std::size_t u = 0; u < num_qubits_; ++u) {
            for (GateKind kind : order) {
                const auto axis = static_cast<Axis>(static_cast<int>(kind));
                const std::size_t idx = angle_index(num_qubits_, l, u, axis);
                tape.push_back({Gate{kind, u, std::nullopt, angles_[idx]},
                                static_cast<std::ptrdiff_t>(idx), false});
            }
        }
        for (const auto& [c, t] : pairs) {
            tape.push_back({Gate::cnot(c, t), -1, false});
        }
        tape.back().ends_layer = true;
    }
    return tape;
}

// ---------------------------------------------------------------------------
// Operations

StateVector amplitude_encode(std::span<const double> values, std::size_t num_qubits) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
        throw ValueError("amplitude encoding needs 1..30 qubits");
    }
    const std::size_t dim = std::size_t{1} << num_qubits;
    if (values.size() > dim) {
        throw DimensionError("cannot encode " + std::to_string(values.size()) +
                             " values into " + std::to_string(num_qubits) + " qubits (2^U < M)");
    }
    double sq = 0.0;
    for (double v : values) {
        sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (!(norm >= kDegenerateNorm)) {
        warn("amplitude_encode: input norm below 1e-12, encoding |0...0>");
        return StateVector(num_qubits);
    }
    std::vector<Complex> amps(dim, Complex{0.0, 0.0});
    for (std::size_t m = 0; m < values.size(); ++m) {
        amps[m] = values[m] / norm;
    }
    return StateAccess::make(num_qubits, std::move(amps));
}

StateVector apply_gate(const StateVector& state, const Gate& gate) {
    gate.validate(state.num_qubits());
    std::vector<Complex> v(state.amplitudes().begin(), state.amplitudes().end());
    apply_gate_inplace(v, state.num_qubits(), gate);
    return StateAccess::make(state.num_qubits(), std::move(v));
}

StateVector run_circuit(const StateVector& state, const CircuitParams& params) {
    if (state.num_qubits() != params.num_qubits()) {
        throw DimensionError("state has " + std::to_string(state.num_qubits()) +
                             " qubits but circuit expects " + std::to_string(params.num_qubits()));
    }
    record_circuit_execution();
    std::vector<Complex> v(state.amplitudes().begin(), state.amplitudes().end());
    for (const auto& entry : params.tape()) {
        apply_gate_inplace(v, state.num_qubits(), entry.gate);
    }
    return StateAccess::make(state.num_qubits(), std::move(v));
}

double expectation_z(const StateVector& state, std::size_t qubit) {
    check_qubit(state.num_qubits(), qubit);
    const std::size_t mask = bit_mask(state.num_qubits(), qubit);
    double acc = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        acc += (i & mask) ? -p : p;
    }
    return std::clamp(acc, -1.0, 1.0);
}

std::vector<double> expectations_z(const StateVector& state) {
    const std::size_t n = state.num_qubits();
    std::vector<double> out(n, 0.0);
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        for (std::size_t u = 0; u < n; ++u) {
            out[u] += (i & bit_mask(n, u)) ? -p : p;
        }
    }
    for (double& e : out) {
        e = std::clamp(e, -1.0, 1.0);
    }
    return out;
}

double sample_from_expectation(double expectation, std::size_t shots, std::uint64_t seed,
                               std::uint64_t stream_key) {
    if (shots == 0) {
        throw ValueError("shot count must be >= 1");
    }
    const double p_plus = std::clamp((1.0 + expectation) / 2.0, 0.0, 1.0);
    CounterRng rng(seed, stream_key);
    std::size_t plus = 0;
    for (std::size_t s = 0; s < shots; ++s) {
        plus += rng.uniform() < p_plus ? 1 : 0;
    }
    const auto n = static_cast<double>(shots);
    return (2.0 * static_cast<double>(plus) - n) / n;
}

double sample_expectation_z(const StateVector& state, std::size_t qubit, std::size_t shots,
                            std::uint64_t seed) {
    const double exact = expectation_z(state, qubit);
    return sample_from_expectation(exact, shots, seed, CounterRng::key(qubit));
}

MeasurementResult measure(const StateVector& state, MeasurementMode mode, std::size_t shots,
                          std::uint64_t seed) {
    MeasurementResult result;
    result.mode = mode;
    result.expectations = expectations_z(state);
    if (mode == MeasurementMode::Sampled) {
        result.shots = shots;
        for (std::size_t u = 0; u < result.expectations.size(); ++u) {
            result.expectations[u] =
                sample_from_expectation(result.expectations[u], shots, seed, CounterRng::key(u));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Dense oracle

namespace {

Eigen::MatrixXcd kron_dense(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Eigen::MatrixXcd to_dense(const Mat2& m) {
    Eigen::MatrixXcd d(2, 2);
    d << m[0], m[1], m[2], m[3];
    return d;
}

// I (x) ... (x) op_q (x) ... (x) I, qubit 0 leftmost.
Eigen::MatrixXcd embed(std::size_t num_qubits, std::size_t qubit, const Eigen::MatrixXcd& op) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    for (std::size_t q = 0; q < num_qubits; ++q) {
        out = kron_dense(out, q == qubit ? op : id);
    }
    return out;
}

}  // namespace

Eigen::MatrixXcd dense_unitary_oracle(const CircuitParams& params) {
    const std::size_t n = params.num_qubits();
    if (n > 6) {
        throw ValueError("dense unitary oracle limited to U <= 6");
    }
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    Eigen::MatrixXcd p0(2, 2);
    p0 << 1, 0, 0, 0;
    Eigen::MatrixXcd p1(2, 2);
    p1 << 0, 0, 0, 1;
    Eigen::MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;

    Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto& entry : params.tape()) {
        const Gate& g = entry.gate;
        Eigen::MatrixXcd op;
        if (g.kind == GateKind::CNOT) {
            op = embed(n, *g.control, p0) + embed(n, *g.control, p1) * embed(n, g.target, x);
        } else {
            op = embed(n, g.target, to_dense(rotation_matrix(g.kind, g.angle)));
        }
        total = op * total;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Adjoint differentiation

std::vector<double> adjoint_vjp(const StateVector& input, const CircuitParams& params,
                                std::span<const double> cotangent,
                                std::vector<double>* input_grad) {
    const std::size_t n = params.num_qubits();
    if (input.num_qubits() != n) {
        throw DimensionError("adjoint_vjp: qubit-count mismatch");
    }
    if (cotangent.size() != n) {
        throw DimensionError("adjoint_vjp: cotangent must have one entry per qubit");
    }
    const auto tape = params.tape();
    std::vector<Complex> psi(input.amplitudes().begin(), input.amplitudes().end());
    for (const auto& entry : tape) {
        apply_gate_inplace(psi, n, entry.gate);
    }
    record_circuit_execution();

    // lambda = O psi with O = sum_u g_u Z_u (diagonal).
    std::vector<Complex> lambda(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        double diag = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            diag += (i & bit_mask(n, u)) ? -cotangent[u] : cotangent[u];
        }
        lambda[i] = diag * psi[i];
    }

    std::vector<double> grad(params.num_angles(), 0.0);
    for (auto it = tape.rbegin(); it != tape.rend(); ++it) {
        const Gate& g = it->gate;
        if (it->param_index >= 0) {
            // d<psi|O|psi>/dtheta = Im <lambda| P |psi> at the gate's output.
            grad[static_cast<std::size_t>(it->param_index)] +=
                pauli_matrix_element(lambda, psi, n, g.target, g.kind).imag();
        }
        apply_gate_adjoint_inplace(psi, n, g);
        apply_gate_adjoint_inplace(lambda, n, g);
    }
    if (input_grad != nullptr) {
        input_grad->resize(lambda.size());
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            (*input_grad)[i] = 2.0 * lambda[i].real();
        }
    }
    return grad;
}

Eigen::MatrixXd expectation_jacobian(const StateVector& input, const CircuitParams& params) {
    const std::size_t n = params.num_qubits();
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(params.num_angles()));
    std::vector<double> unit(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
        unit.assign(n, 0.0);
        unit[u] = 1.0;
        const auto row = adjoint_vjp(input, params, unit);
        for (std::size_t p = 0; p < row.size(); ++p) {
            jac(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(p)) = row[p];
        }
    }
    return jac;
}

std::uint64_t circuit_execution_count() { return g_executions.load(std::memory_order_relaxed); }

void record_circuit_execution(std::uint64_t count) {
    g_executions.fetch_add(count, std::memory_order_relaxed);
}

// ---------------------------------------------------------------------------
// Kernels

namespace kernels {

void apply_1q(std::span<Complex> v, std::size_t num_qubits, std::size_t qubit, const Mat2& m) {
    const std::size_t mask = bit_mask(num_qubits, qubit);
    for (std::size_t hi = 0; hi < v.size(); hi += 2 * mask) {
        for (std::size_t i0 = hi; i0 < hi + mask; ++i0) {
            const std::size_t i1 = i0 | mask;
            const Complex a0 = v[i0];
            const Complex a1 = v[i1];
            v[i0] = m[0] * a0 + m[1] * a1;
            v[i1] = m[2] * a0 + m[3] * a1;
        }
    }
}

void apply_cnot(std::span<Complex> v, std::size_t num_qubits, std::size_t control,
                std::size_t target) {
    const std::size_t cmask = bit_mask(num_qubits, control);
    const std::size_t tmask = bit_mask(num_qubits, target);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if ((i & cmask) && !(i & tmask)) {
            std::swap(v[i], v[i | tmask]);
        }
    }
}

void apply_2q(std::span<Complex> v, std::size_t num_qubits, std::size_t high, std::size_t low,
              const Mat4& m) {
    const std::size_t hmask = bit_mask(num_qubits, high);
    const std::size_t lmask = bit_mask(num_qubits, low);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i & (hmask | lmask)) {
            continue;
        }
        const std::array<std::size_t, 4> idx{i, i | lmask, i | hmask, i | hmask | lmask};
        const std::array<Complex, 4> a{v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]};
        for (std::size_t r = 0; r < 4; ++r) {
            v[idx[r]] = m[4 * r] * a[0] + m[4 * r + 1] * a[1] + m[4 * r + 2] * a[2] +
                        m[4 * r + 3] * a[3];
        }
    }
}

Mat2 adjoint(const Mat2& m) {
    return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

Mat2 transpose(const Mat2& m) { return {m[0], m[2], m[1], m[3]}; }

Mat2 conjugate(const Mat2& m) {
    return {std::conj(m[0]), std::conj(m[1]), std::conj(m[2]), std::conj(m[3])};
}

Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out{};
    for (std::size_t ar = 0; ar < 2; ++ar) {
        for (std::size_t ac = 0; ac < 2; ++ac) {
            for (std::size_t br = 0; br < 2; ++br) {
                for (std::size_t bc = 0; bc < 2; ++bc) {
                    out[(2 * ar + br) * 4 + (2 * ac + bc)] = a[2 * ar + ac] * b[2 * br + bc];
                }
            }
        }
    }
    return out;
}

}  // namespace kernels

}  // namespace qmlp
