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
 * Cross-entropy training for every model kind.
 *
 * Circuit-angle gradients come from adjoint differentiation (statevector or
 * density matrix); sampled-measurement runs fall back to the pi/2 shift rule
 * on sampled expectations.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qmlp/data.hpp"
#include "qmlp/model.hpp"
#include "qmlp/noise.hpp"

namespace qmlp {

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kDivergenceThreshold = 1e6;

/// -log(max(p[label], 1e-12)).
double cross_entropy(const Eigen::VectorXd& probabilities, std::size_t label);

/// Gradient blocks in the order of trainable_blocks().
struct Gradient {
    std::vector<std::string> names;
    std::vector<std::vector<double>> blocks;
    double loss = 0.0;  ///< mean batch cross-entropy at the current parameters

    const std::vector<double>& block(std::string_view name) const;
    std::vector<double> flat() const;
    bool all_finite() const;
};

/// Gradient of the mean cross-entropy over the rows of `features`.
Gradient backward(const AnyModel& model, const Eigen::MatrixXd& features,
                  const std::vector<std::size_t>& labels, const NoiseSpec& noise = {},
                  const MeasurementSpec& measurement = {});

/// Mean cross-entropy (same path as backward, no gradient).
double mean_loss(const AnyModel& model, const Eigen::MatrixXd& features,
                 const std::vector<std::size_t>& labels, const NoiseSpec& noise = {},
                 const MeasurementSpec& measurement = {});

enum class OptimizerKind { Adam, Sgd };
OptimizerKind parse_optimizer(std::string_view name);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

/// In-place Adam update with bias correction. Blocks named in `frozen` are
/// left untouched.
void adam_step(std::vector<ParamBlock>& params, const Gradient& grad, AdamState& state, double lr,
               const std::vector<std::string>& frozen = {});

/// Plain gradient descent.
void sgd_step(std::vector<ParamBlock>& params, const Gradient& grad, double lr,
              const std::vector<std::string>& frozen = {});

struct TrainingConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;  ///< 0 = full batch
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    OptimizerKind optimizer = OptimizerKind::Adam;
    MeasurementSpec measurement;
    NoiseSpec noise;
    bool freeze_angles = false;
    bool record_timing = true;

    void validate() const;
};

struct MetricsRecord {
    std::size_t epoch = 0;
    std::string split;
    std::uint64_t seed = 0;
    double loss = 0.0;
    double accuracy = 0.0;
    double wall_time_ms = 0.0;
};

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
};

Evaluation evaluate(const AnyModel& model, const Dataset& data, const NoiseSpec& noise = {},
                    const MeasurementSpec& measurement = {});

struct SeedRun {
    std::uint64_t seed = 0;
    AnyModel model;
    bool diverged = false;
    std::string failure;
};

struct FitResult {
    std::vector<MetricsRecord> records;
    std::vector<SeedRun> runs;
};

/// Trains one model per seed. Epoch 0 is the evaluation before any update.
/// `test` may be empty.
FitResult fit(ModelKind kind, const ModelDims& dims, const Dataset& train, const Dataset& test,
              const TrainingConfig& config);

/// Continues training an existing model for config.epochs epochs under a
/// single seed (config.seeds.front()).
SeedRun fit_model(AnyModel model, const Dataset& train, const Dataset& test,
                  const TrainingConfig& config, std::vector<MetricsRecord>& records);

struct SummaryRow {
    std::size_t epoch = 0;
    std::string split;
    std::size_t runs = 0;
    double loss_mean = 0.0;
    double loss_std = 0.0;
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
};

/// Mean and sample standard deviation across seeds per (epoch, split).
std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records);

/// Last epoch row for `split`, if any.
std::optional<SummaryRow> final_summary(const std::vector<SummaryRow>& rows, std::string_view split);

}  // namespace qmlp
