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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "qmlp/data.hpp"
#include "qmlp/error.hpp"
#include "support/oracles.hpp"

namespace qmlp {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "qmlp_data_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream f(p);
    f << body;
}

std::string expect_parse_error(const fs::path& p) {
    try {
        load_dataset(p);
    } catch (const ParseError& e) {
        return e.what();
    }
    ADD_FAILURE() << "expected ParseError for " << p;
    return {};
}

// --- diagrams -------------------------------------------------------------

TEST(Diagrams, DeterministicBalancedAndInRange) {
    const auto a = gen_diagrams(101, 16, 0.1, 7);
    const auto b = gen_diagrams(101, 16, 0.1, 7);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].label, b[i].label);
        EXPECT_TRUE(a[i].pixels == b[i].pixels);
        EXPECT_GE(a[i].pixels.minCoeff(), 0.0);
        EXPECT_LE(a[i].pixels.maxCoeff(), 1.0);
        EXPECT_EQ(a[i].pixels.rows(), 16);
        ones += a[i].label;
    }
    EXPECT_LE(std::abs(static_cast<double>(ones) - 50.5), 1.0);
    EXPECT_FALSE(gen_diagrams(4, 16, 0.1, 8)[0].pixels == a[0].pixels);
}

TEST(Diagrams, NoiseIsAdditiveAroundTheCleanPattern) {
    const auto clean = gen_diagrams(40, 16, 0.0, 3);
    const auto noisy = gen_diagrams(40, 16, 0.05, 3);
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        EXPECT_EQ(clean[i].label, noisy[i].label);
        for (Eigen::Index k = 0; k < clean[i].pixels.size(); ++k) {
            const double c = clean[i].pixels.data()[k];
            const double d = noisy[i].pixels.data()[k] - c;
            if (c > 0.2 && c < 0.8) {  // away from clamping
                sum += d;
                sum2 += d * d;
                ++n;
            }
        }
    }
    ASSERT_GT(n, 500U);
    const double mean = sum / static_cast<double>(n);
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(std::sqrt(sum2 / static_cast<double>(n) - mean * mean), 0.05, 0.005);
}

TEST(Diagrams, CleanImagesHaveLinesAndSecondFamilyForDoubleDots) {
    const auto d = gen_diagrams(200, 16, 0.0, 4);
    double bright0 = 0.0, bright1 = 0.0;
    for (const auto& g : d) {
        EXPECT_GT(g.pixels.maxCoeff(), 0.5);
        const double frac = (g.pixels.array() > 0.5).cast<double>().mean();
        (g.label == 0 ? bright0 : bright1) += frac;
    }
    // Two families light up more of the image than one.
    EXPECT_GT(bright1, bright0);
}

TEST(Diagrams, LinearlySeparableAtSixteen) {
    const Dataset d = diagrams_to_dataset(gen_diagrams(400, 16, 0.0, 0));
    EXPECT_EQ(d.dim(), 256U);
    EXPECT_GE(oracle::logistic_regression_accuracy(d.features, d.labels), 0.9);
}

TEST(Diagrams, Errors) {
    EXPECT_THROW(gen_diagrams(1, 16, 0.0, 0), ValueError);
    EXPECT_THROW(gen_diagrams(4, 7, 0.0, 0), ValueError);
    EXPECT_THROW(gen_diagrams(4, 16, -0.1, 0), ValueError);
}

TEST(Diagrams, FlatteningIsRowMajor) {
    const auto d = gen_diagrams(2, 8, 0.0, 1);
    const Dataset ds = diagrams_to_dataset(d);
    EXPECT_EQ(ds.features(1, 3 * 8 + 5), d[1].pixels(3, 5));
    EXPECT_EQ(ds.labels, (std::vector<std::size_t>{0, 1}));
}

// --- DNA ------------------------------------------------------------------

TEST(Dna, EncodingExamples) {
    const Eigen::VectorXd a = encode_dna("A");
    EXPECT_EQ(a, Eigen::Vector4d(1, 0, 0, 0));
    const Eigen::VectorXd acgt = encode_dna("ACGT");
    ASSERT_EQ(acgt.size(), 16);
    for (Eigen::Index i = 0; i < 16; ++i) {
        EXPECT_EQ(acgt(i), (i == 0 || i == 5 || i == 10 || i == 15) ? 1.0 : 0.0);
    }
    const Eigen::VectorXd full = encode_dna(std::string(101, 'G'));
    EXPECT_EQ(full.size(), 404);
    EXPECT_EQ(full.sum(), 101.0);
    try {
        encode_dna("ACNT");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("position 2"), std::string::npos);
    }
}

TEST(Dna, EncodingIsInjective) {
    std::set<std::vector<double>> seen;
    const std::string bases = "ACGT";
    for (int code = 0; code < 256; ++code) {
        std::string s;
        for (int k = 0; k < 4; ++k) {
            s += bases[static_cast<std::size_t>((code >> (2 * k)) & 3)];
        }
        const Eigen::VectorXd v = encode_dna(s);
        seen.insert(std::vector<double>(v.data(), v.data() + v.size()));
    }
    EXPECT_EQ(seen.size(), 256U);
}

TEST(Dna, GeneratorProperties) {
    const auto s = gen_dna(400, kDefaultMotif, 9);
    const auto t = gen_dna(400, kDefaultMotif, 9);
    std::size_t positives = 0, exact = 0, recovered = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(s[i].sequence, t[i].sequence);
        EXPECT_EQ(s[i].sequence.size(), kDnaLength);
        EXPECT_EQ(s[i].features, encode_dna(s[i].sequence));
        if (s[i].label == 0) {
            EXPECT_EQ(s[i].sequence.find(kDefaultMotif), std::string::npos);
            EXPECT_EQ(count_motif_matches(s[i].sequence, kDefaultMotif), 0U);
        } else {
            ++positives;
            exact += s[i].sequence.find(kDefaultMotif) != std::string::npos;
            // Independent scan: count positions within one substitution.
            bool hit = false;
            for (std::size_t p = 0; p + kDefaultMotif.size() <= s[i].sequence.size(); ++p) {
                std::size_t mism = 0;
                for (std::size_t k = 0; k < kDefaultMotif.size(); ++k) {
                    mism += s[i].sequence[p + k] != kDefaultMotif[k];
                }
                hit = hit || mism <= 1;
            }
            recovered += hit;
            EXPECT_GE(count_motif_matches(s[i].sequence, kDefaultMotif, 1), hit ? 1U : 0U);
        }
    }
    EXPECT_EQ(positives, 200U);
    EXPECT_GE(static_cast<double>(recovered), 0.95 * static_cast<double>(positives));
    EXPECT_GT(exact, 0U);
    EXPECT_LT(exact, positives);  // some positives carry a mutated base
}

TEST(Dna, Errors) {
    EXPECT_THROW(gen_dna(10, std::string(101, 'A'), 0), ValueError);
    EXPECT_THROW(gen_dna(10, "", 0), ValueError);
    EXPECT_THROW(gen_dna(10, "TGAXTCA", 0), ParseError);
    EXPECT_EQ(count_motif_matches("AAATGACTCAAATGACTCA", "TGACTCA"), 2U);
    EXPECT_EQ(count_motif_matches("TGACTGA", "TGACTCA", 0), 0U);
    EXPECT_EQ(count_motif_matches("TGACTGA", "TGACTCA", 1), 1U);
    const Dataset d = dna_to_dataset(gen_dna(10, kDefaultMotif, 1));
    EXPECT_EQ(d.dim(), 404U);
}

// --- CSV ------------------------------------------------------------------

TEST(Csv, RoundTripIsBitExact) {
    const Dataset d = diagrams_to_dataset(gen_diagrams(12, 8, 0.3, 5));
    const fs::path p = scratch("round.csv");
    save_dataset(d, p, {"config_hash 0000000000000000", "seeds 0"});
    const Dataset back = load_dataset(p);
    EXPECT_EQ(back.labels, d.labels);
    ASSERT_EQ(back.features.rows(), d.features.rows());
    EXPECT_TRUE(back.features == d.features);
}

TEST(Csv, SmallFileAndComments) {
    const fs::path p = scratch("small.csv");
    write_file(p, "# comment\nlabel,f0,f1\n0,1.5,2\n1,-3e-2,0\n\n2,7,8\n");
    const Dataset d = load_dataset(p);
    EXPECT_EQ(d.size(), 3U);
    EXPECT_EQ(d.num_classes(), 3U);
    EXPECT_EQ(d.features(1, 0), -3e-2);
}

TEST(Csv, ErrorsCarryLineNumbers) {
    const fs::path empty = scratch("empty.csv");
    write_file(empty, "");
    EXPECT_THROW(load_dataset(empty), ParseError);
    const fs::path header_only = scratch("header.csv");
    write_file(header_only, "label,f0\n");
    EXPECT_THROW(load_dataset(header_only), ParseError);
    const fs::path ragged = scratch("ragged.csv");
    write_file(ragged, "label,f0,f1\n0,1,2\n1,3\n");
    EXPECT_NE(expect_parse_error(ragged).find("line 3"), std::string::npos);
    const fs::path bad = scratch("bad.csv");
    write_file(bad, "label,f0\n0,1\n1,x\n");
    EXPECT_NE(expect_parse_error(bad).find("line 3"), std::string::npos);
    const fs::path neg = scratch("neg.csv");
    write_file(neg, "label,f0\n-1,1\n");
    EXPECT_NE(expect_parse_error(neg).find("line 2"), std::string::npos);
    EXPECT_THROW(load_dataset(scratch("does_not_exist.csv")), Error);
}

// --- splitting ------------------------------------------------------------

TEST(Split, StratifiedDeterministicAndDisjoint) {
    Dataset d = diagrams_to_dataset(gen_diagrams(100, 8, 0.0, 2));
    // Tag each row by its index to track membership.
    d.features.col(0) = Eigen::VectorXd::LinSpaced(100, 0, 99);
    const auto [train, test] = split_dataset(d, 0.1, 3);
    const auto [train2, test2] = split_dataset(d, 0.1, 3);
    EXPECT_TRUE(train.features == train2.features);
    EXPECT_EQ(train.size() + test.size(), 100U);
    EXPECT_EQ(test.size(), 10U);
    EXPECT_EQ(std::count(test.labels.begin(), test.labels.end(), 1U), 5);
    EXPECT_EQ(test.split_tag, "test");
    std::set<double> ids;
    for (Eigen::Index r = 0; r < 90; ++r) ids.insert(train.features(r, 0));
    for (Eigen::Index r = 0; r < 10; ++r) ids.insert(test.features(r, 0));
    EXPECT_EQ(ids.size(), 100U);
    EXPECT_THROW(split_dataset(d, 0.0, 0), ValueError);
    EXPECT_THROW(split_dataset(d, 1.0, 0), ValueError);
}

TEST(DatasetType, ValidateAndSubset) {
    Dataset d;
    EXPECT_THROW(d.validate(), ValueError);
    d.features = Eigen::MatrixXd::Ones(2, 3);
    d.labels = {0, 1, 1};
    EXPECT_THROW(d.validate(), DimensionError);
    d.labels = {0, 1};
    d.validate();
    EXPECT_THROW(d.subset({2}), IndexError);
    EXPECT_EQ(d.subset({1, 1}).labels, (std::vector<std::size_t>{1, 1}));
}

}  // namespace
}  // namespace qmlp
