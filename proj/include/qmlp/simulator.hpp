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

/**
 * @file
 * Exact statevector simulation of the rotation/CNOT circuits used throughout
 * the library.
 *
 * Conventions:
 *  - qubit 0 is the most significant bit of a basis index;
 *  - R_P(theta) = exp(-i theta P / 2);
 *  - a layer applies RX, RY, RZ on every qubit (RX first in circuit time unless
 *    RotationOrder::ZYX is selected) and then the entangler.
 */
#pragma once

#include <array>
#include <atomic>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qmlp {

using Complex = std::complex<double>;
/// Row-major 2x2 complex matrix.
using Mat2 = std::array<Complex, 4>;
/// Row-major 4x4 complex matrix on an ordered qubit pair (first qubit = high bit).
using Mat4 = std::array<Complex, 16>;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kDegenerateNorm = 1e-12;

class StateVector {
  public:
    /// |0...0> on num_qubits qubits.
    explicit StateVector(std::size_t num_qubits);

    /// Takes ownership of amplitudes; length must be 2^U and the norm 1 within 1e-12.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    /// Computational basis state |index>.
    static StateVector basis(std::size_t num_qubits, std::size_t index);

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t dimension() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
    double norm() const;

  private:
    StateVector(std::size_t num_qubits, std::vector<Complex> amplitudes);
    friend struct StateAccess;

    std::size_t num_qubits_;
    std::vector<Complex> amplitudes_;
};

enum class GateKind { RX, RY, RZ, CNOT };

struct Gate {
    GateKind kind;
    std::size_t target;
    std::optional<std::size_t> control;
    double angle = 0.0;

    static Gate rx(std::size_t q, double angle) { return {GateKind::RX, q, std::nullopt, angle}; }
    static Gate ry(std::size_t q, double angle) { return {GateKind::RY, q, std::nullopt, angle}; }
    static Gate rz(std::size_t q, double angle) { return {GateKind::RZ, q, std::nullopt, angle}; }
    static Gate cnot(std::size_t control, std::size_t target) {
        return {GateKind::CNOT, target, control, 0.0};
    }

    bool is_rotation() const { return kind != GateKind::CNOT; }
    /// Throws IndexError / ValueError when the gate does not fit a U-qubit register.
    void validate(std::size_t num_qubits) const;
};

/// exp(-i angle P / 2) for P in {X, Y, Z}.
Mat2 rotation_matrix(GateKind kind, double angle);
/// Pauli generator of a rotation kind.
Mat2 pauli_matrix(GateKind kind);

enum class Entangler { Ring, Chain, None };
enum class RotationOrder { XYZ, ZYX };

/// Index of the rotation axis inside a per-qubit triple.
enum class Axis : std::size_t { Alpha = 0, Beta = 1, Gamma = 2 };

/// One gate in application order. param_index is the flat angle index for
/// rotations, -1 for CNOTs.
struct TapeEntry {
    Gate gate;
    std::ptrdiff_t param_index;
    bool ends_layer;
};

class CircuitParams {
  public:
    CircuitParams(std::size_t num_qubits, std::size_t depth,
                  Entangler entangler = Entangler::Ring,
                  RotationOrder order = RotationOrder::XYZ);

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t depth() const { return depth_; }
    Entangler entangler() const { return entangler_; }
    RotationOrder rotation_order() const { return order_; }
    /// 3 * U * L.
    std::size_t num_angles() const { return angles_.size(); }

    static std::size_t angle_index(std::size_t num_qubits, std::size_t layer, std::size_t qubit,
                                   Axis axis) {
        return (layer * num_qubits + qubit) * 3 + static_cast<std::size_t>(axis);
    }
    double& angle(std::size_t layer, std::size_t qubit, Axis axis);
    double angle(std::size_t layer, std::size_t qubit, Axis axis) const;

    std::span<double> angles() { return angles_; }
    std::span<const double> angles() const { return angles_; }

    /// CNOT (control, target) pairs of one entangling layer.
    std::vector<std::pair<std::size_t, std::size_t>> entangler_pairs() const;

    /// Whole circuit flattened in application order.
    std::vector<TapeEntry> tape() const;

  private:
    std::size_t num_qubits_;
    std::size_t depth_;
    Entangler entangler_;
    RotationOrder order_;
    std::vector<double> angles_;
};

enum class MeasurementMode { Exact, Sampled };

struct MeasurementResult {
    std::vector<double> expectations;
    MeasurementMode mode = MeasurementMode::Exact;
    std::size_t shots = 0;
};

/// Normalized, zero-padded amplitude encoding of a real vector into U qubits.
/// A vector with norm below 1e-12 encodes |0...0> and emits a warning.
StateVector amplitude_encode(std::span<const double> values, std::size_t num_qubits);

StateVector apply_gate(const StateVector& state, const Gate& gate);

StateVector run_circuit(const StateVector& state, const CircuitParams& params);

double expectation_z(const StateVector& state, std::size_t qubit);

/// All U Pauli-Z expectations.
std::vector<double> expectations_z(const StateVector& state);

/// (n+ - n-)/n from `shots` Bernoulli draws on qubit `qubit`.
double sample_expectation_z(const StateVector& state, std::size_t qubit, std::size_t shots,
                            std::uint64_t seed);

/// Shot estimate of a +/-1 observable with exact mean `expectation`; the draws
/// come from `stream_key` of `seed`.
double sample_from_expectation(double expectation, std::size_t shots, std::uint64_t seed,
                               std::uint64_t stream_key);

MeasurementResult measure(const StateVector& state, MeasurementMode mode, std::size_t shots = 0,
                          std::uint64_t seed = 0);

/// Dense Kronecker-product construction of the full circuit unitary (U <= 6).
Eigen::MatrixXcd dense_unitary_oracle(const CircuitParams& params);

/// Gradient of sum_u cotangent[u] * <Z_u> with respect to all circuit angles by
/// adjoint differentiation. When input_grad is non-null it receives the
/// derivative with respect to real perturbations of the input amplitudes.
std::vector<double> adjoint_vjp(const StateVector& input, const CircuitParams& params,
                                 std::span<const double> cotangent,
                                 std::vector<double>* input_grad = nullptr);

/// U x (3UL) Jacobian of the Pauli-Z expectations with respect to the angles.
Eigen::MatrixXd expectation_jacobian(const StateVector& input, const CircuitParams& params);

/// Number of circuit executions performed by this process (instrumentation).
std::uint64_t circuit_execution_count();
void record_circuit_execution(std::uint64_t count = 1);

namespace kernels {

/// Low-level in-place kernels on raw amplitude buffers of `num_qubits` qubits.
void apply_1q(std::span<Complex> v, std::size_t num_qubits, std::size_t qubit, const Mat2& m);
void apply_cnot(std::span<Complex> v, std::size_t num_qubits, std::size_t control,
                std::size_t target);
void apply_2q(std::span<Complex> v, std::size_t num_qubits, std::size_t high, std::size_t low,
              const Mat4& m);
Mat2 adjoint(const Mat2& m);
Mat2 transpose(const Mat2& m);
Mat2 conjugate(const Mat2& m);
/// a (x) b with `a` acting on the high qubit.
Mat4 kron(const Mat2& a, const Mat2& b);

}  // namespace kernels

}  // namespace qmlp
