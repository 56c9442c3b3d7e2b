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
 * Synthetic datasets and CSV ingestion.
 *
 * Charge-stability diagrams: single-dot images carry one family of parallel
 * transition lines, double-dot images two families of different slope with
 * suppressed intensity where they cross. DNA samples are one-hot encoded
 * sequences (A, C, G, T per base); positives carry a planted motif.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qmlp {

struct Dataset {
    Eigen::MatrixXd features;          ///< N x D
    std::vector<std::size_t> labels;   ///< length N
    std::string split_tag = "train";

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
    /// 1 + largest label.
    std::size_t num_classes() const;
    void validate() const;
    Dataset subset(const std::vector<std::size_t>& rows) const;
};

struct Diagram {
    Eigen::MatrixXd pixels;  ///< resolution x resolution, values in [0, 1]
    std::size_t label = 0;   ///< 0 single dot, 1 double dot
};

/// Line-pattern parameters; the clean image is a pure function of these.
struct DiagramGeometry {
    double line_width = 0.6;     ///< Gaussian profile sigma in pixels
    double crossing_gap = 0.7;   ///< intensity suppression where families cross
};

std::vector<Diagram> gen_diagrams(std::size_t count, std::size_t resolution, double noise_level,
                                  std::uint64_t seed, const DiagramGeometry& geometry = {});

/// Row-major flattening, one row per diagram.
Dataset diagrams_to_dataset(const std::vector<Diagram>& diagrams);

struct DnaSample {
    std::string sequence;
    Eigen::VectorXd features;
    std::size_t label = 0;
};

inline constexpr std::size_t kDnaLength = 101;
inline constexpr std::string_view kDefaultMotif = "TGACTCA";

/// One-hot blocks in base order A, C, G, T.
Eigen::VectorXd encode_dna(std::string_view sequence);

std::vector<DnaSample> gen_dna(std::size_t count, std::string_view motif, std::uint64_t seed,
                               std::size_t length = kDnaLength);

Dataset dna_to_dataset(const std::vector<DnaSample>& samples);

/// Number of positions where `motif` matches `sequence` with at most
/// `max_mismatches` substitutions.
std::size_t count_motif_matches(std::string_view sequence, std::string_view motif,
                                std::size_t max_mismatches = 0);

/// CSV with header `label,f0,f1,...`; lines starting with '#' are skipped.
Dataset load_dataset(const std::filesystem::path& path);

/// Writes `header_lines` (each prefixed with "# ") then the CSV body. Values use
/// shortest round-trip formatting.
void save_dataset(const Dataset& data, const std::filesystem::path& path,
                  const std::vector<std::string>& header_lines = {});

/// Class-stratified split; returns (train, test).
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double test_fraction,
                                          std::uint64_t seed);

}  // namespace qmlp
