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

#include "qmlp/bounds.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "qmlp/error.hpp"

namespace qmlp {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValueError(std::string(name) + " must be a positive finite number");
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
            field.pop_back();
        }
        out.push_back(field);
    }
    return out;
}

double to_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
    }
}

}  // namespace

void BoundConstants::validate() const {
    require_positive(c1, "C1");
    require_positive(c2, "C2");
    require_positive(c3, "C3");
    require_positive(alpha, "alpha");
    require_positive(lambda, "Lambda");
    require_positive(lambda_q, "Lambda_Q");
    require_positive(r, "r");
    require_positive(c0, "C0");
    if (!(beta > 0.0 && beta <= 0.5)) {
        throw ValueError("beta must lie in (0, 1/2]");
    }
}

double approximation_bound(const BoundConstants& c, double hidden, double depth, double qubits) {
    // C2 = 0 or C3 = 0 is allowed here to isolate individual terms.
    if (!(c.c1 >= 0.0 && c.c2 >= 0.0 && c.c3 >= 0.0) || !(c.alpha > 0.0) ||
        !(c.beta > 0.0 && c.beta <= 0.5)) {
        throw ValueError("invalid approximation-bound constants");
    }
    if (!(hidden >= 1.0 && depth >= 1.0 && qubits >= 1.0)) {
        throw ValueError("M, L and U must be >= 1");
    }
    return c.c1 / std::sqrt(hidden) + c.c2 * std::exp(-c.alpha * depth) +
           c.c3 / std::exp2(c.beta * qubits);
}

std::size_t depth_for_tolerance(double c2, double alpha, double tau) {
    require_positive(c2, "C2");
    require_positive(alpha, "alpha");
    require_positive(tau, "tau");
    if (c2 <= tau) {
        return 0;
    }
    auto holds = [&](double l) { return c2 * std::exp(-alpha * l) <= tau; };
    double l = std::ceil(std::log(c2 / tau) / alpha);
    // Guard the closed form against rounding at exact boundaries.
    while (!holds(l)) {
        l += 1.0;
    }
    while (l >= 1.0 && holds(l - 1.0)) {
        l -= 1.0;
    }
    return static_cast<std::size_t>(l);
}

double uniform_deviation_bound(const BoundConstants& c, double depth, double sample_count,
                               bool refined) {
    require_positive(c.lambda, "Lambda");
    require_positive(c.r, "r");
    if (!(sample_count >= 1.0)) {
        throw ValueError("sample count must be >= 1");
    }
    if (refined) {
        if (!(depth >= 1.0)) {
            throw ValueError("depth must be >= 1");
        }
        return 2.0 * c.lambda * std::sqrt(depth) * c.r / std::sqrt(sample_count);
    }
    require_positive(c.lambda_q, "Lambda_Q");
    return 2.0 * c.lambda * c.lambda_q * c.r / std::sqrt(sample_count);
}

double optimization_bound(double c0, double lambda_min, double t) {
    require_positive(c0, "C0");
    if (!(lambda_min >= 0.0) || !(t >= 0.0)) {
        throw ValueError("lambda_min and t must be non-negative");
    }
    return c0 * std::exp(-lambda_min * t);
}

DepthFit fit_depth(const std::vector<double>& depths, const std::vector<double>& losses) {
    if (depths.size() != losses.size()) {
        throw DimensionError("depth and loss lists differ in length");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    DepthFit fit;
    for (std::size_t i = 0; i < depths.size(); ++i) {
        if (!(losses[i] > 0.0)) {
            continue;
        }
        const double x = depths[i];
        const double y = std::log(losses[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++fit.points;
    }
    const auto n = static_cast<double>(fit.points);
    const double denom = n * sxx - sx * sx;
    if (fit.points < 2 || !(denom > 0.0)) {
        throw ValueError("depth fit needs at least two distinct depths with positive loss");
    }
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    fit.alpha = -slope;
    fit.c2 = std::exp(intercept);
    const double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < depths.size(); ++i) {
        if (losses[i] > 0.0) {
            const double e = std::log(losses[i]) - (intercept + slope * depths[i]);
            ss_res += e * e;
        }
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

DepthFit fit_depth_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    struct Row {
        double value;
        std::size_t epoch;
        double loss;
    };
    std::vector<Row> rows;
    std::vector<double> depths;
    std::vector<double> losses;
    bool sweep = false;
    std::map<std::string, std::size_t> col;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto f = split_csv(line);
        if (header.empty()) {
            header = f;
            for (std::size_t i = 0; i < f.size(); ++i) {
                col[f[i]] = i;
            }
            sweep = col.count("axis") && col.count("value") && col.count("epoch") &&
                    col.count("split") && col.count("loss");
            if (!sweep && !(col.count("depth") && col.count("loss"))) {
                throw ParseError("expected a sweep CSV or a 'depth,loss' CSV");
            }
            continue;
        }
        if (f.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": wrong field count");
        }
        if (!sweep) {
            depths.push_back(to_double(f[col["depth"]], line_no));
            losses.push_back(to_double(f[col["loss"]], line_no));
            continue;
        }
        if (f[col["axis"]] != "depth" || f[col["split"]] != "test") {
            continue;
        }
        rows.push_back({to_double(f[col["value"]], line_no),
                        static_cast<std::size_t>(to_double(f[col["epoch"]], line_no)),
                        to_double(f[col["loss"]], line_no)});
    }
    if (sweep) {
        // Mean final-epoch test loss per depth.
        std::map<double, std::size_t> last_epoch;
        for (const auto& r : rows) {
            auto& e = last_epoch[r.value];
            e = std::max(e, r.epoch);
        }
        std::map<double, std::pair<double, double>> acc;
        for (const auto& r : rows) {
            if (r.epoch == last_epoch[r.value]) {
                acc[r.value].first += r.loss;
                acc[r.value].second += 1.0;
            }
        }
        for (const auto& [depth, s] : acc) {
            depths.push_back(depth);
            losses.push_back(s.first / s.second);
        }
    }
    return fit_depth(depths, losses);
}

}  // namespace qmlp
