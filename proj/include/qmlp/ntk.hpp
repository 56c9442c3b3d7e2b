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
 * Empirical neural tangent kernels of the hybrid models.
 *
 * The kernel parameters are theta = (circuit angles) + (output-layer weights W2);
 * for the two-circuit variant the second group is the second circuit's angles.
 * Affine reconstruction weights and output biases are held fixed. Multi-class
 * kernels sum the per-logit Gram matrices.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qmlp/model.hpp"
#include "qmlp/noise.hpp"

namespace qmlp {

enum class NtkGroup { All, Vqc, W2, Alpha, Beta, Gamma };

NtkGroup parse_ntk_group(std::string_view name);
std::string ntk_group_name(NtkGroup group);

/// Logit Jacobian: row n * J + j holds d f_j(x_n) / d theta. Columns are the
/// circuit angles followed by the second group (vec(W2) column-major, or the
/// second circuit's angles). Hybrid and two-circuit models only.
Eigen::MatrixXd ntk_jacobian(const AnyModel& model, const Eigen::MatrixXd& inputs,
                             const NoiseSpec& noise = {});

/// Column indices of `group` inside the ntk_jacobian layout.
std::vector<Eigen::Index> ntk_group_columns(const AnyModel& model, NtkGroup group);

/// N x N Gram matrix sum_j J_j,g(x) . J_j,g(x') for one parameter group.
Eigen::MatrixXd empirical_ntk(const AnyModel& model, const Eigen::MatrixXd& inputs, NtkGroup group,
                              const NoiseSpec& noise = {});

/// Gram of the selected columns of a precomputed Jacobian.
Eigen::MatrixXd gram_from_jacobian(const Eigen::MatrixXd& jacobian, std::size_t classes,
                                   const std::vector<Eigen::Index>& columns);

/// Smallest eigenvalue of a symmetric matrix; rejects asymmetry above 1e-8.
double lambda_min(const Eigen::MatrixXd& matrix);

struct NtkReport {
    Eigen::MatrixXd k_vm;
    Eigen::MatrixXd k_vqc;
    Eigen::MatrixXd k_w2;
    Eigen::MatrixXd k_alpha;
    Eigen::MatrixXd k_beta;
    Eigen::MatrixXd k_gamma;
    double lambda_min_vm = 0.0;
    double lambda_min_vqc = 0.0;
    std::uint64_t batch_fingerprint = 0;

    /// Largest violation of symmetry, additivity (vm = vqc + w2, vqc = a + b + g)
    /// and positive semidefiniteness; used for contract checks.
    double max_asymmetry() const;
    double max_recomposition_error() const;
    double min_eigenvalue() const;
};

NtkReport ntk_report(const AnyModel& model, const Eigen::MatrixXd& inputs,
                     const NoiseSpec& noise = {});

/// FNV-1a over the raw bytes of the inputs.
std::uint64_t fingerprint(const Eigen::MatrixXd& inputs);

struct DominanceReport {
    double lambda_min_vm = 0.0;
    double lambda_min_vqc = 0.0;
    double ratio = 0.0;  ///< lambda_min_vm / max(lambda_min_vqc, 1e-300)
    bool passes = false;
};

DominanceReport eigenvalue_dominance_check(const AnyModel& model, const Eigen::MatrixXd& inputs,
                                           const NoiseSpec& noise = {});

struct WidthEstimate {
    Eigen::MatrixXd mean;
    Eigen::MatrixXd standard_error;  ///< per entry; zero when draws == 1
    double mean_variance = 0.0;      ///< average per-entry inter-draw sample variance
    std::size_t draws = 0;
};

/// Monte-Carlo average of the group kernel over `draws` random initializations
/// of (kind, dims). A single draw reproduces one empirical kernel.
WidthEstimate infinite_width_estimate(ModelKind kind, const ModelDims& dims,
                                      const Eigen::MatrixXd& inputs, std::size_t draws,
                                      std::uint64_t seed, NtkGroup group = NtkGroup::All);

struct ConvergenceReport {
    double fitted_rate = 0.0;  ///< -slope of log(loss) against time
    double lambda_min = 0.0;
    double c0 = 0.0;
    bool monotone = false;     ///< excess risk non-increasing from `monotone_from` on
    std::size_t first_increase = 0;  ///< index of the first increase (trace size if none)
    std::vector<double> excess;       ///< loss(t) - loss(final)
    std::vector<double> bound;        ///< c0 * exp(-lambda_min * t)
    std::vector<std::size_t> violations;  ///< indices with excess > bound
};

/// Checks a loss trace recorded at times t_k = k * time_step.
ConvergenceReport convergence_bound_check(const std::vector<double>& trace, double lambda_min_vm,
                                          double c0, double time_step = 1.0,
                                          std::size_t monotone_from = 0);

/// sqrt(2) * ||softmax(f(X)) - Y||_F / sqrt(lambda_min(K_vm)) at the current parameters.
double initial_c0(const AnyModel& model, const Eigen::MatrixXd& inputs,
                  const std::vector<std::size_t>& labels, const NoiseSpec& noise = {});

}  // namespace qmlp
