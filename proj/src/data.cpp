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

#include "qmlp/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qmlp/error.hpp"
#include "qmlp/rng.hpp"

namespace qmlp {

namespace {

using Index = Eigen::Index;

constexpr std::uint64_t kDiagramStream = 0x64696167ULL;
constexpr std::uint64_t kDnaStream = 0x646e61ULL;
constexpr std::uint64_t kSplitStream = 0x73706c74ULL;

double profile(double distance_px, double sigma) {
    return std::exp(-distance_px * distance_px / (2.0 * sigma * sigma));
}

// Distance (in pixels) from (x, y) to the nearest line of the family
// y = -slope * x + offset + k * spacing.
double family_distance(double x, double y, double slope, double offset, double spacing,
                       double resolution) {
    const double c = y + slope * x - offset;
    const double k = std::round(c / spacing);
    const double perp = std::abs(c - k * spacing) / std::sqrt(1.0 + slope * slope);
    return perp * resolution;
}

std::size_t base_index(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: return 4;
    }
}

constexpr std::array<char, 4> kBases{'A', 'C', 'G', 'T'};

std::string random_sequence(CounterRng& rng, std::size_t length) {
    std::string s(length, 'A');
    for (char& c : s) {
        c = kBases[rng() % 4];
    }
    return s;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.pop_back();
    }
    std::size_t start = 0;
    while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) {
        ++start;
    }
    return s.substr(start);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (!s.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
    }
    return v;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) {
        throw Error("failed to format number");
    }
    return {buf.data(), ptr};
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t Dataset::num_classes() const {
    if (labels.empty()) {
        return 0;
    }
    return *std::max_element(labels.begin(), labels.end()) + 1;
}

void Dataset::validate() const {
    if (labels.empty()) {
        throw ValueError("dataset is empty");
    }
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw DimensionError("dataset feature rows and labels disagree");
    }
    if (features.cols() == 0) {
        throw DimensionError("dataset has no features");
    }
    if (!features.allFinite()) {
        throw ValueError("dataset contains non-finite features");
    }
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.split_tag = split_tag;
    out.features.resize(static_cast<Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= labels.size()) {
            throw IndexError("dataset row index out of range");
        }
        out.features.row(static_cast<Index>(i)) = features.row(static_cast<Index>(rows[i]));
        out.labels.push_back(labels[rows[i]]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Diagrams

std::vector<Diagram> gen_diagrams(std::size_t count, std::size_t resolution, double noise_level,
                                  std::uint64_t seed, const DiagramGeometry& geometry) {
    if (count < 2) {
        throw ValueError("diagram count must be >= 2 so both classes appear");
    }
    if (resolution < 8) {
        throw ValueError("diagram resolution must be >= 8");
    }
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
        throw ValueError("noise level must be a finite non-negative number");
    }
    const auto res = static_cast<double>(resolution);
    std::vector<Diagram> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        CounterRng rng(seed, CounterRng::key(kDiagramStream, i));
        Diagram& dg = out[i];
        dg.label = i % 2;
        dg.pixels.resize(static_cast<Index>(resolution), static_cast<Index>(resolution));
        // Family geometry: single dots get one diagonal family; double dots a
        // steep and a shallow family.
        const double slope_a = dg.label == 0 ? 0.8 + 0.4 * rng.uniform() : 2.0 + 1.5 * rng.uniform();
        const double spacing_a = 0.3 + 0.15 * rng.uniform();
        const double offset_a = spacing_a * rng.uniform();
        const double slope_b = 0.25 + 0.25 * rng.uniform();
        const double spacing_b = 0.3 + 0.15 * rng.uniform();
        const double offset_b = spacing_b * rng.uniform();
        for (std::size_t r = 0; r < resolution; ++r) {
            for (std::size_t c = 0; c < resolution; ++c) {
                // Row 0 is the top of the image; y grows upwards.
                const double x = (static_cast<double>(c) + 0.5) / res;
                const double y = 1.0 - (static_cast<double>(r) + 0.5) / res;
                const double pa = profile(family_distance(x, y, slope_a, offset_a, spacing_a, res),
                                          geometry.line_width);
                double v = pa;
                if (dg.label == 1) {
                    const double pb = profile(
                        family_distance(x, y, slope_b, offset_b, spacing_b, res), geometry.line_width);
                    v = std::max(pa, pb) * (1.0 - geometry.crossing_gap * pa * pb);
                }
                dg.pixels(static_cast<Index>(r), static_cast<Index>(c)) = v;
            }
        }
        if (noise_level > 0.0) {
            CounterRng noise(seed, CounterRng::key(kDiagramStream, i, 1));
            for (Index k = 0; k < dg.pixels.size(); ++k) {
                double& p = dg.pixels.data()[k];
                p = std::clamp(p + noise_level * noise.normal(), 0.0, 1.0);
            }
        }
    }
    return out;
}

Dataset diagrams_to_dataset(const std::vector<Diagram>& diagrams) {
    if (diagrams.empty()) {
        throw ValueError("no diagrams to convert");
    }
    const Index side = diagrams.front().pixels.rows();
    Dataset d;
    d.features.resize(static_cast<Index>(diagrams.size()), side * side);
    for (std::size_t i = 0; i < diagrams.size(); ++i) {
        const auto& p = diagrams[i].pixels;
        if (p.rows() != side || p.cols() != side) {
            throw DimensionError("diagrams have mixed resolutions");
        }
        for (Index r = 0; r < side; ++r) {
            for (Index c = 0; c < side; ++c) {
                d.features(static_cast<Index>(i), r * side + c) = p(r, c);
            }
        }
        d.labels.push_back(diagrams[i].label);
    }
    return d;
}

// ---------------------------------------------------------------------------
// DNA

Eigen::VectorXd encode_dna(std::string_view sequence) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Index>(4 * sequence.size()));
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        const std::size_t b = base_index(sequence[i]);
        if (b > 3) {
            throw ParseError("invalid base '" + std::string(1, sequence[i]) + "' at position " +
                             std::to_string(i));
        }
        v(static_cast<Index>(4 * i + b)) = 1.0;
    }
    return v;
}

std::size_t count_motif_matches(std::string_view sequence, std::string_view motif,
                                std::size_t max_mismatches) {
    if (motif.empty() || motif.size() > sequence.size()) {
        return 0;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i + motif.size() <= sequence.size(); ++i) {
        std::size_t mism = 0;
        for (std::size_t k = 0; k < motif.size() && mism <= max_mismatches; ++k) {
            mism += sequence[i + k] != motif[k] ? 1 : 0;
        }
        hits += mism <= max_mismatches ? 1 : 0;
    }
    return hits;
}

std::vector<DnaSample> gen_dna(std::size_t count, std::string_view motif, std::uint64_t seed,
                               std::size_t length) {
    if (motif.empty() || motif.size() >= length) {
        throw ValueError("motif must be non-empty and shorter than the sequence");
    }
    for (char c : motif) {
        if (base_index(c) > 3) {
            throw ParseError("motif contains invalid base '" + std::string(1, c) + "'");
        }
    }
    std::vector<DnaSample> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        CounterRng rng(seed, CounterRng::key(kDnaStream, i));
        DnaSample& s = out[i];
        s.label = i % 2;
        if (s.label == 1) {
            s.sequence = random_sequence(rng, length);
            const std::size_t pos = rng() % (length - motif.size() + 1);
            std::string planted(motif);
            if (rng.uniform() < 0.5) {
                const std::size_t k = rng() % planted.size();
                const std::size_t shift = 1 + rng() % 3;
                planted[k] = kBases[(base_index(planted[k]) + shift) % 4];
            }
            s.sequence.replace(pos, planted.size(), planted);
        } else {
            do {
                s.sequence = random_sequence(rng, length);
            } while (count_motif_matches(s.sequence, motif) > 0);
        }
        s.features = encode_dna(s.sequence);
    }
    return out;
}

Dataset dna_to_dataset(const std::vector<DnaSample>& samples) {
    if (samples.empty()) {
        throw ValueError("no DNA samples to convert");
    }
    Dataset d;
    d.features.resize(static_cast<Index>(samples.size()), samples.front().features.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].features.size() != d.features.cols()) {
            throw DimensionError("DNA samples have mixed lengths");
        }
        d.features.row(static_cast<Index>(i)) = samples[i].features.transpose();
        d.labels.push_back(samples[i].label);
    }
    return d;
}

// ---------------------------------------------------------------------------
// CSV

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open dataset '" + path.string() + "'");
    }
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    bool have_header = false;
    std::vector<double> values;
    std::vector<std::size_t> labels;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split_commas(line);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "label") {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": expected header 'label,f0,...'");
            }
            dim = fields.size() - 1;
            have_header = true;
            continue;
        }
        if (fields.size() != dim + 1) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim + 1) + " fields, got " +
                             std::to_string(fields.size()));
        }
        const double label = parse_double(fields[0], line_no);
        if (label < 0.0 || label != std::floor(label)) {
            throw ParseError("line " + std::to_string(line_no) + ": label must be a non-negative integer");
        }
        labels.push_back(static_cast<std::size_t>(label));
        for (std::size_t k = 1; k <= dim; ++k) {
            values.push_back(parse_double(fields[k], line_no));
        }
    }
    if (!have_header) {
        throw ParseError("dataset '" + path.string() + "' is empty");
    }
    if (labels.empty()) {
        throw ParseError("dataset '" + path.string() + "' has no rows");
    }
    Dataset d;
    d.labels = std::move(labels);
    d.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), static_cast<Index>(d.labels.size()), static_cast<Index>(dim));
    d.validate();
    return d;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path,
                  const std::vector<std::string>& header_lines) {
    data.validate();
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write dataset '" + path.string() + "'");
    }
    for (const auto& h : header_lines) {
        out << "# " << h << '\n';
    }
    out << "label";
    for (Index k = 0; k < data.features.cols(); ++k) {
        out << ",f" << k;
    }
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.labels[i];
        for (Index k = 0; k < data.features.cols(); ++k) {
            out << ',' << format_double(data.features(static_cast<Index>(i), k));
        }
        out << '\n';
    }
    if (!out) {
        throw Error("failed writing dataset '" + path.string() + "'");
    }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double test_fraction,
                                          std::uint64_t seed) {
    data.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ValueError("test fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t cls = 0; cls < data.num_classes(); ++cls) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data.labels[i] == cls) {
                rows.push_back(i);
            }
        }
        CounterRng rng(seed, CounterRng::key(kSplitStream, cls));
        for (std::size_t i = rows.size(); i > 1; --i) {
            std::swap(rows[i - 1], rows[rng() % i]);
        }
        const auto n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(rows.size())));
        test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    if (train_rows.empty() || test_rows.empty()) {
        throw ValueError("split leaves an empty partition");
    }
    Dataset train = data.subset(train_rows);
    Dataset test = data.subset(test_rows);
    train.split_tag = "train";
    test.split_tag = "test";
    return {std::move(train), std::move(test)};
}

}  // namespace qmlp
