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
 * Amplitude- and phase-damping noise between circuit layers.
 *
 * After every layer (rotations + entangler) each qubit receives one amplitude
 * damping channel followed by one phase damping channel. Two execution
 * backends are provided: an exact density-matrix simulation (U <= 10) and
 * Kraus-trajectory sampling on pure states.
 *
 * Density matrices are stored row-major as a 2U-qubit register vector with
 * index (row << U) | col, so row qubit u is register qubit u and column qubit
 * u is register qubit U + u. Single-qubit superoperators then act on the
 * register pair (u, U + u).
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmlp/simulator.hpp"

namespace qmlp {

struct NoiseSpec {
    double adr = 0.0;  ///< amplitude damping rate per layer per qubit
    double pdr = 0.0;  ///< phase damping rate per layer per qubit

    bool is_zero() const { return adr == 0.0 && pdr == 0.0; }
    void validate() const;
};

struct KrausSet {
    std::vector<Mat2> operators;

    /// max |(sum_i K_i^dag K_i - I)_jk|.
    double completeness_error() const;
    /// sum_i K_i (x) conj(K_i): acts on vec(rho) as rho -> sum K rho K^dag.
    Mat4 superoperator() const;
    /// sum_i K_i^dag (x) K_i^T: Heisenberg-picture map O -> sum K^dag O K.
    Mat4 adjoint_superoperator() const;
};

/// K0 = diag(1, sqrt(1 - adr)), K1 = sqrt(adr) |0><1|.
KrausSet kraus_amplitude_damping(double adr);
/// K0 = diag(1, sqrt(1 - pdr)), K1 = diag(0, sqrt(pdr)).
KrausSet kraus_phase_damping(double pdr);

class DensityMatrix {
  public:
    static constexpr std::size_t kMaxQubits = 10;

    /// |0...0><0...0|.
    explicit DensityMatrix(std::size_t num_qubits);
    static DensityMatrix from_state(const StateVector& state);
    /// Validates Hermiticity and unit trace within 1e-10.
    static DensityMatrix from_matrix(const Eigen::MatrixXcd& matrix);

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t dimension() const { return std::size_t{1} << num_qubits_; }
    Complex operator()(std::size_t row, std::size_t col) const {
        return entries_[(row << num_qubits_) | col];
    }
    std::span<const Complex> entries() const { return entries_; }

    Complex trace() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;
    double expectation_z(std::size_t qubit) const;
    Eigen::MatrixXcd to_matrix() const;

  private:
    DensityMatrix(std::size_t num_qubits, std::vector<Complex> entries);
    friend struct DensityAccess;

    std::size_t num_qubits_;
    std::vector<Complex> entries_;
};

DensityMatrix apply_channel_density(const DensityMatrix& rho, const KrausSet& kraus,
                                    std::size_t qubit);

DensityMatrix apply_gate_density(const DensityMatrix& rho, const Gate& gate);

/// Full noisy circuit on a density matrix.
DensityMatrix run_circuit_density(const DensityMatrix& rho, const CircuitParams& params,
                                  const NoiseSpec& noise);

enum class NoiseMethod { Auto, Density, Trajectory };

struct NoisyExpectations {
    std::vector<double> values;
    /// Per-qubit standard error of the trajectory mean; zero for exact backends.
    std::vector<double> standard_errors;
    NoiseMethod method = NoiseMethod::Density;
    std::size_t trajectories = 0;
};

/// Pauli-Z expectations of the noisy circuit applied to `input`. Auto selects
/// the density backend for U <= 10 and trajectories otherwise.
NoisyExpectations noisy_expectations(const StateVector& input, const CircuitParams& params,
                                     const NoiseSpec& noise, NoiseMethod method = NoiseMethod::Auto,
                                     std::size_t trajectories = 1000, std::uint64_t seed = 0);

/// U x S matrix of expectations for S input states. Zero noise runs the
/// statevector simulator; otherwise the exact density backend (via
/// Heisenberg-evolved observables) is used.
Eigen::MatrixXd batch_expectations(std::span<const StateVector> states,
                                   const CircuitParams& params, const NoiseSpec& noise);

struct BatchVjp {
    std::vector<double> angle_grad;
    /// d/d(real input amplitudes) per state; empty unless requested.
    std::vector<std::vector<double>> state_grads;
};

/// Gradient of sum_{u,s} cotangent(u, s) * E_us where E = batch_expectations.
/// Zero noise: statevector adjoint. Noisy: density-matrix adjoint for U <= 8,
/// parameter shift on the density backend above that.
BatchVjp batch_vjp(std::span<const StateVector> states, const Eigen::MatrixXd& cotangent,
                   const CircuitParams& params, const NoiseSpec& noise, bool want_state_grads);

/// U x (3UL) Jacobian by the pi/2 shift rule on the exact backend.
Eigen::MatrixXd parameter_shift_jacobian(const StateVector& input, const CircuitParams& params,
                                         const NoiseSpec& noise = {});

/// U x (3UL) Jacobian by adjoint differentiation (density-matrix adjoint when noisy).
Eigen::MatrixXd adjoint_jacobian(const StateVector& input, const CircuitParams& params,
                                 const NoiseSpec& noise = {});

}  // namespace qmlp
