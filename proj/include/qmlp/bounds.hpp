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
 * Closed-form error bounds and the depth-selection rule.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace qmlp {

struct BoundConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
    double alpha = 1.0;
    double beta = 0.5;       ///< in (0, 1/2]
    double lambda = 1.0;     ///< output-layer norm bound
    double lambda_q = 1.0;   ///< circuit-side norm bound
    double r = 1.0;          ///< input radius
    double c0 = 1.0;

    void validate() const;
};

/// C1 / sqrt(M) + C2 exp(-alpha L) + C3 / 2^(beta U).
double approximation_bound(const BoundConstants& c, double hidden, double depth, double qubits);

/// Smallest integer L >= 0 with C2 exp(-alpha L) <= tau.
std::size_t depth_for_tolerance(double c2, double alpha, double tau);

/// 2 Lambda Lambda_Q r / sqrt(S), or 2 Lambda sqrt(L) r / sqrt(S) when refined.
double uniform_deviation_bound(const BoundConstants& c, double depth, double sample_count,
                               bool refined);

/// C0 exp(-lambda_min t).
double optimization_bound(double c0, double lambda_min, double t);

struct DepthFit {
    double c2 = 0.0;
    double alpha = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log(loss) = log(C2) - alpha L over points with loss > 0.
DepthFit fit_depth(const std::vector<double>& depths, const std::vector<double>& losses);

/// Reads (depth, loss) pairs from a CSV: either a sweep file with columns
/// `axis,value,...,loss,...` restricted to the final test epoch, or a plain
/// two-column `depth,loss` file.
DepthFit fit_depth_csv(const std::filesystem::path& path);

}  // namespace qmlp
