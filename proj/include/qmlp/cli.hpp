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
 * Experiment orchestration behind the `qmlp` command-line tool.
 *
 * Configuration precedence: built-in defaults, then the JSON file given by
 * --config, then explicit command-line flags.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qmlp/data.hpp"
#include "qmlp/model.hpp"
#include "qmlp/train.hpp"

namespace qmlp {

inline constexpr const char* kArtifactVersion = "qmlp 1.0.0";

struct ExperimentConfig {
    std::string task = "dots";  ///< dots | dna | file
    std::filesystem::path data_path;
    std::size_t count = 400;
    std::size_t resolution = 16;
    double data_noise = 0.0;
    std::uint64_t data_seed = 0;
    double test_fraction = 0.1;
    std::string motif = "TGACTCA";

    ModelKind model = ModelKind::Hybrid;
    ModelDims dims{0, 64, 2, 6, 3};

    TrainingConfig training;
    std::size_t shots = 0;  ///< 0 = exact expectations
    std::filesystem::path out = "out";

    /// Seeds are base_seed, base_seed + 1, ... (seed_count of them).
    std::size_t seed_count = 5;
    std::uint64_t base_seed = 0;

    void finalize();  ///< derives training.seeds and measurement settings
};

/// Canonical JSON of the config (output path excluded).
std::string config_to_json(const ExperimentConfig& config);
/// Overlays the keys present in a JSON document onto `config`.
void apply_config_json(ExperimentConfig& config, const std::string& json_text);
/// FNV-1a of config_to_json.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Generates or loads the dataset and splits it; sets dims.input_dim.
std::pair<Dataset, Dataset> prepare_data(ExperimentConfig& config);

struct TrainOutcome {
    FitResult fit;
    std::vector<SummaryRow> summary;
    std::size_t trainable_parameters = 0;
};

/// Runs all seeds; when write_outputs is set, writes metrics.csv, summary.json
/// and checkpoints/seed_<s>.json under config.out.
TrainOutcome run_train(ExperimentConfig config, bool write_outputs);

enum class SweepAxis { Qubits, Depth, Noise };
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepPoint {
    double value = 0.0;
    TrainOutcome outcome;
};

/// One training run per value; writes <axis>_<value>/ per point plus merged
/// sweep.csv and sweep_summary.json when write_outputs is set.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, SweepAxis axis,
                                  const std::vector<double>& values, bool write_outputs);

/// Metrics CSV text with the header block.
std::string metrics_csv(const std::vector<MetricsRecord>& records, const ExperimentConfig& config);

/// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace qmlp
