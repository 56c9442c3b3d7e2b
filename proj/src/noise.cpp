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

#include "qmlp/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "qmlp/detail/state_access.hpp"
#include "qmlp/error.hpp"
#include "qmlp/parallel.hpp"
#include "qmlp/rng.hpp"

namespace qmlp {

struct DensityAccess {
    static std::vector<Complex>& data(DensityMatrix& rho) { return rho.entries_; }
    static DensityMatrix make(std::size_t num_qubits, std::vector<Complex> entries) {
        return DensityMatrix(num_qubits, std::move(entries));
    }
};

namespace {

constexpr std::size_t kMaxAdjointQubits = 8;

void check_rate(double rate, const char* name) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw ValueError(std::string(name) + " must lie in [0, 1], got " + std::to_string(rate));
    }
}

// One step of the noisy circuit: a gate or a single-qubit channel.
struct NoisyOp {
    bool is_channel = false;
    Gate gate{GateKind::RZ, 0, std::nullopt, 0.0};
    std::ptrdiff_t param_index = -1;
    std::size_t qubit = 0;
    Mat4 forward{};
    Mat4 heisenberg{};
};

struct NoisyProgram {
    std::vector<NoisyOp> ops;
};

NoisyProgram compile(const CircuitParams& params, const NoiseSpec& noise) {
    noise.validate();
    NoisyProgram prog;
    const KrausSet amplitude = kraus_amplitude_damping(noise.adr);
    const KrausSet phase = kraus_phase_damping(noise.pdr);
    const Mat4 amp_fwd = amplitude.superoperator();
    const Mat4 amp_adj = amplitude.adjoint_superoperator();
    const Mat4 ph_fwd = phase.superoperator();
    const Mat4 ph_adj = phase.adjoint_superoperator();
    for (const auto& entry : params.tape()) {
        NoisyOp op;
        op.gate = entry.gate;
        op.param_index = entry.param_index;
        prog.ops.push_back(op);
        if (!entry.ends_layer) {
            continue;
        }
        for (std::size_t u = 0; u < params.num_qubits(); ++u) {
            if (noise.adr > 0.0) {
                prog.ops.push_back({true, op.gate, -1, u, amp_fwd, amp_adj});
            }
            if (noise.pdr > 0.0) {
                prog.ops.push_back({true, op.gate, -1, u, ph_fwd, ph_adj});
            }
        }
    }
    return prog;
}

// rho -> op(rho) on the 2U register.
void forward_op(std::vector<Complex>& v, std::size_t n, const NoisyOp& op) {
    if (op.is_channel) {
        kernels::apply_2q(v, 2 * n, op.qubit, n + op.qubit, op.forward);
        return;
    }
    const Gate& g = op.gate;
    if (g.kind == GateKind::CNOT) {
        kernels::apply_cnot(v, 2 * n, *g.control, g.target);
        kernels::apply_cnot(v, 2 * n, n + *g.control, n + g.target);
        return;
    }
    const Mat2 m = rotation_matrix(g.kind, g.angle);
    kernels::apply_1q(v, 2 * n, g.target, m);
    kernels::apply_1q(v, 2 * n, n + g.target, kernels::conjugate(m));
}

// O -> op^dag(O) on the 2U register.
void heisenberg_op(std::vector<Complex>& v, std::size_t n, const NoisyOp& op) {
    if (op.is_channel) {
        kernels::apply_2q(v, 2 * n, op.qubit, n + op.qubit, op.heisenberg);
        return;
    }
    const Gate& g = op.gate;
    if (g.kind == GateKind::CNOT) {
        kernels::apply_cnot(v, 2 * n, *g.control, g.target);
        kernels::apply_cnot(v, 2 * n, n + *g.control, n + g.target);
        return;
    }
    const Mat2 m = rotation_matrix(g.kind, g.angle);
    kernels::apply_1q(v, 2 * n, g.target, kernels::adjoint(m));
    kernels::apply_1q(v, 2 * n, n + g.target, kernels::transpose(m));
}

std::vector<Complex> z_observable(std::size_t n, std::size_t qubit) {
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t mask = std::size_t{1} << (n - 1 - qubit);
    std::vector<Complex> v(dim * dim, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < dim; ++i) {
        v[(i << n) | i] = (i & mask) ? -1.0 : 1.0;
    }
    return v;
}

// psi^dag O psi for O stored on the 2U register.
double quadratic_form(const std::vector<Complex>& o, std::size_t n, std::span<const Complex> psi) {
    const std::size_t dim = psi.size();
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < dim; ++i) {
        Complex row{0.0, 0.0};
        const Complex* o_row = o.data() + (i << n);
        for (std::size_t j = 0; j < dim; ++j) {
            row += o_row[j] * psi[j];
        }
        acc += std::conj(psi[i]) * row;
    }
    return acc.real();
}

std::vector<double> density_expectations(const std::vector<Complex>& rho, std::size_t n) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        const double p = rho[(i << n) | i].real();
        for (std::size_t u = 0; u < n; ++u) {
            out[u] += (i & (std::size_t{1} << (n - 1 - u))) ? -p : p;
        }
    }
    for (double& e : out) {
        e = std::clamp(e, -1.0, 1.0);
    }
    return out;
}

// Samples one Kraus branch on `qubit` and renormalizes.
void apply_kraus_branch(std::vector<Complex>& psi, std::size_t n, std::size_t qubit,
                        const KrausSet& kraus, CounterRng& rng) {
    const std::size_t mask = std::size_t{1} << (n - 1 - qubit);
    const double r = rng.uniform();
    double cumulative = 0.0;
    std::vector<Complex> candidate(psi.size());
    for (std::size_t k = 0; k < kraus.operators.size(); ++k) {
        const Mat2& m = kraus.operators[k];
        double weight = 0.0;
        for (std::size_t hi = 0; hi < psi.size(); hi += 2 * mask) {
            for (std::size_t i0 = hi; i0 < hi + mask; ++i0) {
                const std::size_t i1 = i0 | mask;
                candidate[i0] = m[0] * psi[i0] + m[1] * psi[i1];
                candidate[i1] = m[2] * psi[i0] + m[3] * psi[i1];
                weight += std::norm(candidate[i0]) + std::norm(candidate[i1]);
            }
        }
        cumulative += weight;
        const bool last = k + 1 == kraus.operators.size();
        if ((r < cumulative || last) && weight > 0.0) {
            const double scale = 1.0 / std::sqrt(weight);
            for (std::size_t i = 0; i < psi.size(); ++i) {
                psi[i] = candidate[i] * scale;
            }
            return;
        }
    }
}

NoisyExpectations trajectory_expectations(const StateVector& input, const CircuitParams& params,
                                          const NoiseSpec& noise, std::size_t trajectories,
                                          std::uint64_t seed) {
    if (trajectories == 0) {
        throw ValueError("trajectory method needs at least one trajectory");
    }
    const std::size_t n = params.num_qubits();
    const KrausSet amplitude = kraus_amplitude_damping(noise.adr);
    const KrausSet phase = kraus_phase_damping(noise.pdr);
    const auto tape = params.tape();

    std::vector<std::vector<double>> per_traj(trajectories);
    parallel_for(trajectories, [&](std::size_t t) {
        CounterRng rng(seed, CounterRng::key(0x7472616aULL, t));
        std::vector<Complex> psi(input.amplitudes().begin(), input.amplitudes().end());
        for (const auto& entry : tape) {
            if (entry.gate.kind == GateKind::CNOT) {
                kernels::apply_cnot(psi, n, *entry.gate.control, entry.gate.target);
            } else {
                kernels::apply_1q(psi, n, entry.gate.target,
                                  rotation_matrix(entry.gate.kind, entry.gate.angle));
            }
            if (!entry.ends_layer) {
                continue;
            }
            for (std::size_t u = 0; u < n; ++u) {
                if (noise.adr > 0.0) {
                    apply_kraus_branch(psi, n, u, amplitude, rng);
                }
                if (noise.pdr > 0.0) {
                    apply_kraus_branch(psi, n, u, phase, rng);
                }
            }
        }
        per_traj[t] = expectations_z(StateAccess::make(n, std::move(psi)));
    });
    record_circuit_execution(trajectories);

    NoisyExpectations out;
    out.method = NoiseMethod::Trajectory;
    out.trajectories = trajectories;
    out.values.assign(n, 0.0);
    out.standard_errors.assign(n, 0.0);
    for (const auto& e : per_traj) {
        for (std::size_t u = 0; u < n; ++u) {
            out.values[u] += e[u];
        }
    }
    const auto count = static_cast<double>(trajectories);
    for (double& v : out.values) {
        v /= count;
    }
    if (trajectories > 1) {
        for (std::size_t u = 0; u < n; ++u) {
            double ss = 0.0;
            for (const auto& e : per_traj) {
                ss += (e[u] - out.values[u]) * (e[u] - out.values[u]);
            }
            out.standard_errors[u] = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
        }
    }
    return out;
}

void check_density_size(std::size_t n) {
    if (n > DensityMatrix::kMaxQubits) {
        throw ValueError("density backend limited to U <= 10, got " + std::to_string(n));
    }
}

}  // namespace

// ---------------------------------------------------------------------------

void NoiseSpec::validate() const {
    check_rate(adr, "amplitude damping rate");
    check_rate(pdr, "phase damping rate");
}

double KrausSet::completeness_error() const {
    Mat2 sum{};
    for (const auto& k : operators) {
        const Mat2 kd = kernels::adjoint(k);
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t c = 0; c < 2; ++c) {
                sum[2 * r + c] += kd[2 * r] * k[c] + kd[2 * r + 1] * k[2 + c];
            }
        }
    }
    sum[0] -= 1.0;
    sum[3] -= 1.0;
    double err = 0.0;
    for (const auto& s : sum) {
        err = std::max(err, std::abs(s));
    }
    return err;
}

Mat4 KrausSet::superoperator() const {
    Mat4 out{};
    for (const auto& k : operators) {
        const Mat4 term = kernels::kron(k, kernels::conjugate(k));
        for (std::size_t i = 0; i < 16; ++i) {
            out[i] += term[i];
        }
    }
    return out;
}

Mat4 KrausSet::adjoint_superoperator() const {
    Mat4 out{};
    for (const auto& k : operators) {
        const Mat4 term = kernels::kron(kernels::adjoint(k), kernels::transpose(k));
        for (std::size_t i = 0; i < 16; ++i) {
            out[i] += term[i];
        }
    }
    return out;
}

KrausSet kraus_amplitude_damping(double adr) {
    check_rate(adr, "amplitude damping rate");
    return {{Mat2{Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{std::sqrt(1.0 - adr), 0}},
             Mat2{Complex{0, 0}, Complex{std::sqrt(adr), 0}, Complex{0, 0}, Complex{0, 0}}}};
}

KrausSet kraus_phase_damping(double pdr) {
    check_rate(pdr, "phase damping rate");
    return {{Mat2{Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{std::sqrt(1.0 - pdr), 0}},
             Mat2{Complex{0, 0}, Complex{0, 0}, Complex{0, 0}, Complex{std::sqrt(pdr), 0}}}};
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(std::size_t num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits == 0) {
        throw ValueError("density matrix needs at least one qubit");
    }
    check_density_size(num_qubits);
    const std::size_t dim = std::size_t{1} << num_qubits;
    entries_.assign(dim * dim, Complex{0.0, 0.0});
    entries_[0] = 1.0;
}

DensityMatrix::DensityMatrix(std::size_t num_qubits, std::vector<Complex> entries)
    : num_qubits_(num_qubits), entries_(std::move(entries)) {}

DensityMatrix DensityMatrix::from_state(const StateVector& state) {
    const std::size_t n = state.num_qubits();
    check_density_size(n);
    const auto psi = state.amplitudes();
    const std::size_t dim = psi.size();
    std::vector<Complex> e(dim * dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            e[(i << n) | j] = psi[i] * std::conj(psi[j]);
        }
    }
    return DensityMatrix(n, std::move(e));
}

DensityMatrix DensityMatrix::from_matrix(const Eigen::MatrixXcd& matrix) {
    const auto dim = static_cast<std::size_t>(matrix.rows());
    if (matrix.rows() != matrix.cols() || dim < 2 || (dim & (dim - 1)) != 0) {
        throw DimensionError("density matrix must be square with power-of-two size");
    }
    const auto n = static_cast<std::size_t>(std::countr_zero(dim));
    check_density_size(n);
    std::vector<Complex> e(dim * dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            e[(i << n) | j] = matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    DensityMatrix rho(n, std::move(e));
    if (rho.hermiticity_error() > 1e-10 || std::abs(rho.trace() - 1.0) > 1e-10) {
        throw ValueError("matrix is not a unit-trace Hermitian operator");
    }
    return rho;
}

Complex DensityMatrix::trace() const {
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < dimension(); ++i) {
        acc += (*this)(i, i);
    }
    return acc;
}

double DensityMatrix::hermiticity_error() const {
    double err = 0.0;
    for (std::size_t i = 0; i < dimension(); ++i) {
        for (std::size_t j = i; j < dimension(); ++j) {
            err = std::max(err, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        }
    }
    return err;
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_matrix(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double DensityMatrix::expectation_z(std::size_t qubit) const {
    if (qubit >= num_qubits_) {
        throw IndexError("qubit index out of range");
    }
    return density_expectations(entries_, num_qubits_)[qubit];
}

Eigen::MatrixXcd DensityMatrix::to_matrix() const {
    const auto dim = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            m(i, j) = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------

DensityMatrix apply_channel_density(const DensityMatrix& rho, const KrausSet& kraus,
                                    std::size_t qubit) {
    const std::size_t n = rho.num_qubits();
    if (qubit >= n) {
        throw IndexError("qubit index out of range");
    }
    DensityMatrix out = rho;
    kernels::apply_2q(DensityAccess::data(out), 2 * n, qubit, n + qubit, kraus.superoperator());
    return out;
}

DensityMatrix apply_gate_density(const DensityMatrix& rho, const Gate& gate) {
    gate.validate(rho.num_qubits());
    DensityMatrix out = rho;
    NoisyOp op;
    op.gate = gate;
    forward_op(DensityAccess::data(out), rho.num_qubits(), op);
    return out;
}

DensityMatrix run_circuit_density(const DensityMatrix& rho, const CircuitParams& params,
                                  const NoiseSpec& noise) {
    if (rho.num_qubits() != params.num_qubits()) {
        throw DimensionError("density matrix and circuit disagree on qubit count");
    }
    const NoisyProgram prog = compile(params, noise);
    DensityMatrix out = rho;
    auto& v = DensityAccess::data(out);
    for (const auto& op : prog.ops) {
        forward_op(v, rho.num_qubits(), op);
    }
    record_circuit_execution();
    return out;
}

NoisyExpectations noisy_expectations(const StateVector& input, const CircuitParams& params,
                                     const NoiseSpec& noise, NoiseMethod method,
                                     std::size_t trajectories, std::uint64_t seed) {
    noise.validate();
    const std::size_t n = params.num_qubits();
    if (input.num_qubits() != n) {
        throw DimensionError("state and circuit disagree on qubit count");
    }
    if (method == NoiseMethod::Auto) {
        method = n <= DensityMatrix::kMaxQubits ? NoiseMethod::Density : NoiseMethod::Trajectory;
    }
    if (method == NoiseMethod::Trajectory && trajectories == 0) {
        throw ValueError("trajectory method needs at least one trajectory");
    }
    if (method == NoiseMethod::Density) {
        check_density_size(n);
    }
    NoisyExpectations out;
    out.method = method;
    out.standard_errors.assign(n, 0.0);
    if (noise.is_zero()) {
        // Every unravelling is the noiseless run; skip it so the result is bit-identical.
        out.values = expectations_z(run_circuit(input, params));
        out.trajectories = method == NoiseMethod::Trajectory ? trajectories : 0;
        return out;
    }
    if (method == NoiseMethod::Trajectory) {
        return trajectory_expectations(input, params, noise, trajectories, seed);
    }
    const DensityMatrix rho = run_circuit_density(DensityMatrix::from_state(input), params, noise);
    out.values = density_expectations(std::vector<Complex>(rho.entries().begin(),
                                                           rho.entries().end()),
                                      n);
    return out;
}

Eigen::MatrixXd batch_expectations(std::span<const StateVector> states,
                                   const CircuitParams& params, const NoiseSpec& noise) {
    noise.validate();
    const std::size_t n = params.num_qubits();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(states.size()));
    if (noise.is_zero()) {
        parallel_for(states.size(), [&](std::size_t s) {
            const auto e = expectations_z(run_circuit(states[s], params));
            for (std::size_t u = 0; u < n; ++u) {
                out(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(s)) = e[u];
            }
        });
        return out;
    }
    check_density_size(n);
    for (const auto& s : states) {
        if (s.num_qubits() != n) {
            throw DimensionError("state and circuit disagree on qubit count");
        }
    }
    // E_us = <psi_s| Phi^dag(Z_u) |psi_s>: U Heisenberg passes serve every state.
    const NoisyProgram prog = compile(params, noise);
    for (std::size_t u = 0; u < n; ++u) {
        std::vector<Complex> o = z_observable(n, u);
        for (auto it = prog.ops.rbegin(); it != prog.ops.rend(); ++it) {
            heisenberg_op(o, n, *it);
        }
        for (std::size_t s = 0; s < states.size(); ++s) {
            out(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(s)) =
                std::clamp(quadratic_form(o, n, states[s].amplitudes()), -1.0, 1.0);
        }
    }
    record_circuit_execution(states.size());
    return out;
}

namespace {

BatchVjp density_adjoint_vjp(std::span<const StateVector> states, const Eigen::MatrixXd& cot,
                             const CircuitParams& params, const NoiseSpec& noise,
                             bool want_state_grads) {
    const std::size_t n = params.num_qubits();
    const std::size_t dim = std::size_t{1} << n;
    const NoisyProgram prog = compile(params, noise);

    BatchVjp out;
    out.angle_grad.assign(params.num_angles(), 0.0);
    if (want_state_grads) {
        out.state_grads.assign(states.size(), std::vector<double>(dim, 0.0));
    }
    std::vector<std::vector<Complex>> snapshots(prog.ops.size());
    std::vector<Complex> scratch(dim * dim);

    for (std::size_t u = 0; u < n; ++u) {
        const auto row = cot.row(static_cast<Eigen::Index>(u));
        if (row.cwiseAbs().maxCoeff() == 0.0) {
            continue;
        }
        // Backward: Heisenberg observable after each rotation.
        std::vector<Complex> o = z_observable(n, u);
        for (std::size_t k = prog.ops.size(); k-- > 0;) {
            if (prog.ops[k].param_index >= 0) {
                snapshots[k] = o;
            }
            heisenberg_op(o, n, prog.ops[k]);
        }
        if (want_state_grads) {
            for (std::size_t s = 0; s < states.size(); ++s) {
                const double g = row(static_cast<Eigen::Index>(s));
                if (g == 0.0) {
                    continue;
                }
                const auto psi = states[s].amplitudes();
                for (std::size_t i = 0; i < dim; ++i) {
                    Complex acc{0.0, 0.0};
                    for (std::size_t j = 0; j < dim; ++j) {
                        acc += o[(i << n) | j] * psi[j];
                    }
                    out.state_grads[s][i] += 2.0 * g * acc.real();
                }
            }
        }
        // Forward: R = sum_s g_s |psi_s><psi_s|.
        std::vector<Complex> r(dim * dim, Complex{0.0, 0.0});
        for (std::size_t s = 0; s < states.size(); ++s) {
            const double g = row(static_cast<Eigen::Index>(s));
            if (g == 0.0) {
                continue;
            }
            const auto psi = states[s].amplitudes();
            for (std::size_t i = 0; i < dim; ++i) {
                const Complex gi = g * psi[i];
                for (std::size_t j = 0; j < dim; ++j) {
                    r[(i << n) | j] += gi * std::conj(psi[j]);
                }
            }
        }
        for (std::size_t k = 0; k < prog.ops.size(); ++k) {
            const NoisyOp& op = prog.ops[k];
            forward_op(r, n, op);
            if (op.param_index < 0) {
                continue;
            }
            // dF/dtheta = Im Tr(O_k P R_k), P applied on the row index.
            scratch = r;
            kernels::apply_1q(scratch, 2 * n, op.gate.target, pauli_matrix(op.gate.kind));
            Complex z{0.0, 0.0};
            const auto& ok = snapshots[k];
            for (std::size_t i = 0; i < scratch.size(); ++i) {
                z += std::conj(ok[i]) * scratch[i];
            }
            out.angle_grad[static_cast<std::size_t>(op.param_index)] += z.imag();
        }
    }
    record_circuit_execution(states.size());
    return out;
}

BatchVjp shift_rule_vjp(std::span<const StateVector> states, const Eigen::MatrixXd& cot,
                        const CircuitParams& params, const NoiseSpec& noise) {
    BatchVjp out;
    out.angle_grad.assign(params.num_angles(), 0.0);
    CircuitParams shifted = params;
    for (std::size_t p = 0; p < params.num_angles(); ++p) {
        const double base = params.angles()[p];
        shifted.angles()[p] = base + std::numbers::pi / 2.0;
        const Eigen::MatrixXd plus = batch_expectations(states, shifted, noise);
        shifted.angles()[p] = base - std::numbers::pi / 2.0;
        const Eigen::MatrixXd minus = batch_expectations(states, shifted, noise);
        shifted.angles()[p] = base;
        out.angle_grad[p] = 0.5 * (cot.array() * (plus - minus).array()).sum();
    }
    return out;
}

}  // namespace

BatchVjp batch_vjp(std::span<const StateVector> states, const Eigen::MatrixXd& cotangent,
                   const CircuitParams& params, const NoiseSpec& noise, bool want_state_grads) {
    noise.validate();
    const std::size_t n = params.num_qubits();
    if (cotangent.rows() != static_cast<Eigen::Index>(n) ||
        cotangent.cols() != static_cast<Eigen::Index>(states.size())) {
        throw DimensionError("cotangent must be U x (number of states)");
    }
    if (noise.is_zero()) {
        BatchVjp out;
        out.angle_grad.assign(params.num_angles(), 0.0);
        if (want_state_grads) {
            out.state_grads.resize(states.size());
        }
        // Per-state gradients, summed afterwards in a fixed order.
        std::vector<std::vector<double>> per_state(states.size());
        parallel_for(states.size(), [&](std::size_t s) {
            std::vector<double> g(n);
            for (std::size_t u = 0; u < n; ++u) {
                g[u] = cotangent(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(s));
            }
            per_state[s] = adjoint_vjp(states[s], params, g,
                                       want_state_grads ? &out.state_grads[s] : nullptr);
        });
        for (const auto& grad : per_state) {
            for (std::size_t p = 0; p < grad.size(); ++p) {
                out.angle_grad[p] += grad[p];
            }
        }
        return out;
    }
    check_density_size(n);
    if (n <= kMaxAdjointQubits) {
        return density_adjoint_vjp(states, cotangent, params, noise, want_state_grads);
    }
    if (want_state_grads) {
        throw ValueError("input-state gradients under noise require U <= 8");
    }
    return shift_rule_vjp(states, cotangent, params, noise);
}

Eigen::MatrixXd parameter_shift_jacobian(const StateVector& input, const CircuitParams& params,
                                         const NoiseSpec& noise) {
    const std::size_t n = params.num_qubits();
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(params.num_angles()));
    CircuitParams shifted = params;
    for (std::size_t p = 0; p < params.num_angles(); ++p) {
        const double base = params.angles()[p];
        shifted.angles()[p] = base + std::numbers::pi / 2.0;
        const auto plus = noisy_expectations(input, shifted, noise, NoiseMethod::Density).values;
        shifted.angles()[p] = base - std::numbers::pi / 2.0;
        const auto minus = noisy_expectations(input, shifted, noise, NoiseMethod::Density).values;
        shifted.angles()[p] = base;
        for (std::size_t u = 0; u < n; ++u) {
            jac(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(p)) =
                0.5 * (plus[u] - minus[u]);
        }
    }
    return jac;
}

Eigen::MatrixXd adjoint_jacobian(const StateVector& input, const CircuitParams& params,
                                 const NoiseSpec& noise) {
    if (noise.is_zero()) {
        return expectation_jacobian(input, params);
    }
    const std::size_t n = params.num_qubits();
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(params.num_angles()));
    const std::vector<StateVector> states{input};
    for (std::size_t u = 0; u < n; ++u) {
        Eigen::MatrixXd cot = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 1);
        cot(static_cast<Eigen::Index>(u), 0) = 1.0;
        const auto vjp = batch_vjp(states, cot, params, noise, false);
        for (std::size_t p = 0; p < vjp.angle_grad.size(); ++p) {
            jac(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(p)) = vjp.angle_grad[p];
        }
    }
    return jac;
}

}  // namespace qmlp
