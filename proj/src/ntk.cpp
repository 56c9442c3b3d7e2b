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

#include "qmlp/ntk.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "qmlp/error.hpp"
#include "qmlp/parallel.hpp"
#include "qmlp/rng.hpp"

namespace qmlp {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

// D x (U * P) matrix whose row d is vec of the U x P expectation Jacobian of
// encoded column d (row-major over (u, p)).
Eigen::MatrixXd stacked_jacobians(const std::vector<StateVector>& encoded,
                                  const CircuitParams& circuit, const NoiseSpec& noise) {
    const std::size_t u = circuit.num_qubits();
    const std::size_t p = circuit.num_angles();
    Eigen::MatrixXd out(idx(encoded.size()), idx(u * p));
    parallel_for(encoded.size(), [&](std::size_t d) {
        const Eigen::MatrixXd jac = adjoint_jacobian(encoded[d], circuit, noise);
        for (std::size_t q = 0; q < u; ++q) {
            for (std::size_t k = 0; k < p; ++k) {
                out(idx(d), idx(q * p + k)) = jac(idx(q), idx(k));
            }
        }
    });
    return out;
}

// Angle rows of the logit Jacobian: d f_j / d theta_p = sum_u c(j, u) T_n(u, p)
// with T_n = sum_d x_nd Jac_d and c = W2eff^T diag(relu'(h)) lin^T / sqrt(M).
void fill_angle_rows(Eigen::MatrixXd& jac, const Eigen::MatrixXd& inputs,
                     const GeneratedWeights& gen, const CircuitParams& circuit,
                     const AffineMap& lin, const Eigen::MatrixXd& w2_eff, const NoiseSpec& noise) {
    const std::size_t u = circuit.num_qubits();
    const std::size_t p = circuit.num_angles();
    const Index j_count = w2_eff.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(gen.w1_hat.rows()));
    const Eigen::MatrixXd stacked = stacked_jacobians(gen.encoded, circuit, noise);
    const Eigen::MatrixXd t_all = inputs * stacked;  // N x (U * P)
    const Eigen::MatrixXd h = gen.w1_hat * inputs.transpose();
    for (Index n = 0; n < inputs.rows(); ++n) {
        const Eigen::VectorXd mask = (h.col(n).array() > 0.0).cast<double>().matrix();
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tn(idx(u), idx(p));
        for (std::size_t q = 0; q < u; ++q) {
            for (std::size_t k = 0; k < p; ++k) {
                tn(idx(q), idx(k)) = t_all(n, idx(q * p + k));
            }
        }
        for (Index j = 0; j < j_count; ++j) {
            const Eigen::VectorXd c =
                lin.weight * (w2_eff.col(j).array() * mask.array()).matrix() * scale;
            jac.block(n * j_count + j, 0, 1, idx(p)) = c.transpose() * tn;
        }
    }
}

std::size_t first_group_size(const AnyModel& model) {
    if (const auto* h = std::get_if<HybridModelParams>(&model)) {
        return h->circuit.num_angles();
    }
    if (const auto* v = std::get_if<HybridV2Params>(&model)) {
        return v->circuit1.num_angles();
    }
    throw ValueError("NTK analysis supports the vqc-mlpnet and vqc-mlpnet-v2 models");
}

std::size_t total_columns(const AnyModel& model) {
    if (const auto* h = std::get_if<HybridModelParams>(&model)) {
        return h->circuit.num_angles() + static_cast<std::size_t>(h->out.weight.size());
    }
    if (const auto* v = std::get_if<HybridV2Params>(&model)) {
        return v->circuit1.num_angles() + v->circuit2.num_angles();
    }
    throw ValueError("NTK analysis supports the vqc-mlpnet and vqc-mlpnet-v2 models");
}

std::size_t class_count(const AnyModel& model) {
    if (const auto* h = std::get_if<HybridModelParams>(&model)) {
        return h->out.out_dim();
    }
    if (const auto* v = std::get_if<HybridV2Params>(&model)) {
        return static_cast<std::size_t>(v->out_bias.size());
    }
    throw ValueError("NTK analysis supports the vqc-mlpnet and vqc-mlpnet-v2 models");
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

NtkGroup parse_ntk_group(std::string_view name) {
    if (name == "all" || name == "vm") return NtkGroup::All;
    if (name == "vqc") return NtkGroup::Vqc;
    if (name == "w2") return NtkGroup::W2;
    if (name == "alpha") return NtkGroup::Alpha;
    if (name == "beta") return NtkGroup::Beta;
    if (name == "gamma") return NtkGroup::Gamma;
    throw ValueError("unknown NTK group '" + std::string(name) + "'");
}

std::string ntk_group_name(NtkGroup group) {
    switch (group) {
        case NtkGroup::All: return "all";
        case NtkGroup::Vqc: return "vqc";
        case NtkGroup::W2: return "w2";
        case NtkGroup::Alpha: return "alpha";
        case NtkGroup::Beta: return "beta";
        case NtkGroup::Gamma: return "gamma";
    }
    return "unknown";
}

Eigen::MatrixXd ntk_jacobian(const AnyModel& model, const Eigen::MatrixXd& inputs,
                             const NoiseSpec& noise) {
    if (inputs.rows() == 0) {
        throw ValueError("NTK needs at least one input");
    }
    const std::size_t classes = class_count(model);
    const std::size_t p1 = first_group_size(model);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(inputs.rows() * idx(classes), idx(total_columns(model)));

    if (const auto* h = std::get_if<HybridModelParams>(&model)) {
        const GeneratedWeights gen = generate_w1_hat(*h, noise);
        if (inputs.cols() != gen.w1_hat.cols()) {
            throw DimensionError("input width does not match the model input dimension");
        }
        fill_angle_rows(jac, inputs, gen, h->circuit, h->lin, h->out.weight, noise);
        const double scale = 1.0 / std::sqrt(static_cast<double>(gen.w1_hat.rows()));
        const Eigen::MatrixXd a = (gen.w1_hat * inputs.transpose()).cwiseMax(0.0);
        const Index m = gen.w1_hat.rows();
        for (Index n = 0; n < inputs.rows(); ++n) {
            for (Index j = 0; j < idx(classes); ++j) {
                // vec(W2) column-major: entry (m, j) sits at j * M + m.
                jac.block(n * idx(classes) + j, idx(p1) + j * m, 1, m) = a.col(n).transpose() * scale;
            }
        }
        return jac;
    }

    const auto& v = std::get<HybridV2Params>(model);
    const GeneratedWeightsV2 gen = generate_v2(v, noise);
    if (inputs.cols() != gen.first.w1_hat.cols()) {
        throw DimensionError("input width does not match the model input dimension");
    }
    fill_angle_rows(jac, inputs, gen.first, v.circuit1, v.lin1, gen.second.w1_hat, noise);
    // Second circuit: d f_j / d phi_p = sum_u (lin2 a)_u dE2(u, j)/d phi_p / sqrt(M).
    const double scale = 1.0 / std::sqrt(static_cast<double>(gen.first.w1_hat.rows()));
    const Eigen::MatrixXd a = (gen.first.w1_hat * inputs.transpose()).cwiseMax(0.0);
    const Eigen::MatrixXd la = v.lin2.weight * a * scale;  // U x N
    const std::size_t p2 = v.circuit2.num_angles();
    for (std::size_t j = 0; j < classes; ++j) {
        const Eigen::MatrixXd jac2 = adjoint_jacobian(gen.second.encoded[j], v.circuit2, noise);
        const Eigen::MatrixXd rows = la.transpose() * jac2;  // N x P2
        for (Index n = 0; n < inputs.rows(); ++n) {
            jac.block(n * idx(classes) + idx(j), idx(p1), 1, idx(p2)) = rows.row(n);
        }
    }
    return jac;
}

std::vector<Index> ntk_group_columns(const AnyModel& model, NtkGroup group) {
    const std::size_t p1 = first_group_size(model);
    const std::size_t total = total_columns(model);
    std::vector<Index> cols;
    auto axis = [&](std::size_t k) {
        for (std::size_t p = k; p < p1; p += 3) {
            cols.push_back(idx(p));
        }
    };
    switch (group) {
        case NtkGroup::All:
            for (std::size_t p = 0; p < total; ++p) cols.push_back(idx(p));
            break;
        case NtkGroup::Vqc:
            for (std::size_t p = 0; p < p1; ++p) cols.push_back(idx(p));
            break;
        case NtkGroup::W2:
            for (std::size_t p = p1; p < total; ++p) cols.push_back(idx(p));
            break;
        case NtkGroup::Alpha: axis(0); break;
        case NtkGroup::Beta: axis(1); break;
        case NtkGroup::Gamma: axis(2); break;
    }
    return cols;
}

Eigen::MatrixXd gram_from_jacobian(const Eigen::MatrixXd& jacobian, std::size_t classes,
                                   const std::vector<Index>& columns) {
    if (classes == 0 || jacobian.rows() % idx(classes) != 0) {
        throw DimensionError("Jacobian rows are not a multiple of the class count");
    }
    const Index n = jacobian.rows() / idx(classes);
    Eigen::MatrixXd sub(jacobian.rows(), idx(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        sub.col(idx(c)) = jacobian.col(columns[c]);
    }
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (Index j = 0; j < idx(classes); ++j) {
        Eigen::MatrixXd rows(n, sub.cols());
        for (Index i = 0; i < n; ++i) {
            rows.row(i) = sub.row(i * idx(classes) + j);
        }
        k += rows * rows.transpose();
    }
    // Exact symmetry: the product is symmetric up to rounding of the summation order.
    return (k + k.transpose()) / 2.0;
}

Eigen::MatrixXd empirical_ntk(const AnyModel& model, const Eigen::MatrixXd& inputs, NtkGroup group,
                              const NoiseSpec& noise) {
    const Eigen::MatrixXd jac = ntk_jacobian(model, inputs, noise);
    return gram_from_jacobian(jac, class_count(model), ntk_group_columns(model, group));
}

double lambda_min(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
        throw DimensionError("lambda_min needs a non-empty square matrix");
    }
    if (max_abs(matrix - matrix.transpose()) > 1e-8) {
        throw ValueError("lambda_min: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge");
    }
    return solver.eigenvalues().minCoeff();
}

double NtkReport::max_asymmetry() const {
    double e = 0.0;
    for (const auto* k : {&k_vm, &k_vqc, &k_w2, &k_alpha, &k_beta, &k_gamma}) {
        e = std::max(e, max_abs(*k - k->transpose()));
    }
    return e;
}

double NtkReport::max_recomposition_error() const {
    return std::max(max_abs(k_vm - (k_vqc + k_w2)), max_abs(k_vqc - (k_alpha + k_beta + k_gamma)));
}

double NtkReport::min_eigenvalue() const {
    double e = std::numeric_limits<double>::infinity();
    for (const auto* k : {&k_vm, &k_vqc, &k_w2, &k_alpha, &k_beta, &k_gamma}) {
        e = std::min(e, lambda_min(*k));
    }
    return e;
}

std::uint64_t fingerprint(const Eigen::MatrixXd& inputs) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::int64_t shape[2] = {inputs.rows(), inputs.cols()};
    feed(shape, sizeof(shape));
    feed(inputs.data(), sizeof(double) * static_cast<std::size_t>(inputs.size()));
    return h;
}

NtkReport ntk_report(const AnyModel& model, const Eigen::MatrixXd& inputs, const NoiseSpec& noise) {
    const Eigen::MatrixXd jac = ntk_jacobian(model, inputs, noise);
    const std::size_t classes = class_count(model);
    NtkReport r;
    r.k_alpha = gram_from_jacobian(jac, classes, ntk_group_columns(model, NtkGroup::Alpha));
    r.k_beta = gram_from_jacobian(jac, classes, ntk_group_columns(model, NtkGroup::Beta));
    r.k_gamma = gram_from_jacobian(jac, classes, ntk_group_columns(model, NtkGroup::Gamma));
    r.k_w2 = gram_from_jacobian(jac, classes, ntk_group_columns(model, NtkGroup::W2));
    r.k_vqc = gram_from_jacobian(jac, classes, ntk_group_columns(model, NtkGroup::Vqc));
    r.k_vm = gram_from_jacobian(jac, classes, ntk_group_columns(model, NtkGroup::All));
    r.lambda_min_vm = lambda_min(r.k_vm);
    r.lambda_min_vqc = lambda_min(r.k_vqc);
    r.batch_fingerprint = fingerprint(inputs);
    return r;
}

DominanceReport eigenvalue_dominance_check(const AnyModel& model, const Eigen::MatrixXd& inputs,
                                           const NoiseSpec& noise) {
    const NtkReport r = ntk_report(model, inputs, noise);
    DominanceReport d;
    d.lambda_min_vm = r.lambda_min_vm;
    d.lambda_min_vqc = r.lambda_min_vqc;
    d.ratio = d.lambda_min_vm / std::max(d.lambda_min_vqc, 1e-300);
    d.passes = d.lambda_min_vm >= d.lambda_min_vqc - 1e-10;
    return d;
}

WidthEstimate infinite_width_estimate(ModelKind kind, const ModelDims& dims,
                                      const Eigen::MatrixXd& inputs, std::size_t draws,
                                      std::uint64_t seed, NtkGroup group) {
    if (draws == 0) {
        throw ValueError("infinite-width estimate needs at least one draw");
    }
    std::vector<Eigen::MatrixXd> kernels;
    kernels.reserve(draws);
    for (std::size_t r = 0; r < draws; ++r) {
        kernels.push_back(empirical_ntk(init_model(kind, dims, mix64(seed + r)), inputs, group));
    }
    WidthEstimate w;
    w.draws = draws;
    w.mean = Eigen::MatrixXd::Zero(inputs.rows(), inputs.rows());
    for (const auto& k : kernels) {
        w.mean += k;
    }
    w.mean /= static_cast<double>(draws);
    w.standard_error = Eigen::MatrixXd::Zero(inputs.rows(), inputs.rows());
    if (draws > 1) {
        Eigen::MatrixXd var = Eigen::MatrixXd::Zero(inputs.rows(), inputs.rows());
        for (const auto& k : kernels) {
            var += (k - w.mean).cwiseAbs2();
        }
        var /= static_cast<double>(draws - 1);
        w.mean_variance = var.mean();
        w.standard_error = (var / static_cast<double>(draws)).cwiseSqrt();
    }
    return w;
}

ConvergenceReport convergence_bound_check(const std::vector<double>& trace, double lambda_min_vm,
                                          double c0, double time_step,
                                          std::size_t monotone_from) {
    if (trace.size() < 3) {
        throw ValueError("convergence check needs a trace of at least 3 entries");
    }
    if (!(time_step > 0.0)) {
        throw ValueError("time step must be positive");
    }
    ConvergenceReport r;
    r.lambda_min = lambda_min_vm;
    r.c0 = c0;
    const double final_loss = trace.back();
    // Least-squares slope of log(loss) against time over positive entries.
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, count = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (!(trace[k] > 0.0)) {
            continue;
        }
        const double t = static_cast<double>(k) * time_step;
        const double y = std::log(trace[k]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        count += 1.0;
    }
    const double denom = count * stt - st * st;
    r.fitted_rate = (count >= 2.0 && denom > 0.0) ? -(count * sty - st * sy) / denom : 0.0;
    if (r.fitted_rate == 0.0) {
        r.fitted_rate = 0.0;  // normalize -0
    }

    r.first_increase = trace.size();
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double t = static_cast<double>(k) * time_step;
        r.excess.push_back(trace[k] - final_loss);
        r.bound.push_back(c0 * std::exp(-lambda_min_vm * t));
        if (r.excess.back() > r.bound.back()) {
            r.violations.push_back(k);
        }
        if (k > monotone_from && k > 0 && r.first_increase == trace.size() &&
            trace[k] > trace[k - 1]) {
            r.first_increase = k;
        }
    }
    r.monotone = r.first_increase == trace.size();
    return r;
}

double initial_c0(const AnyModel& model, const Eigen::MatrixXd& inputs,
                  const std::vector<std::size_t>& labels, const NoiseSpec& noise) {
    const Eigen::MatrixXd p = predict(model, inputs, noise);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(p.rows(), p.cols());
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] >= static_cast<std::size_t>(p.rows())) {
            throw IndexError("label out of range");
        }
        y(idx(labels[n]), idx(n)) = 1.0;
    }
    const double lmin = lambda_min(empirical_ntk(model, inputs, NtkGroup::All, noise));
    if (!(lmin > 0.0)) {
        throw NumericalError("K_vm is singular; C0 is undefined");
    }
    return std::sqrt(2.0) * (p - y).norm() / std::sqrt(lmin);
}

}  // namespace qmlp
