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

#include "qmlp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmlp/error.hpp"
#include "qmlp/parallel.hpp"
#include "qmlp/rng.hpp"

namespace qmlp {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

// Stream identifiers for initialization draws.
enum Stream : std::uint64_t { kW1 = 1, kAngles, kLin, kOut, kW2Seed, kAngles2, kLin2, kHead, kL1, kL2 };

Eigen::MatrixXd gaussian(std::size_t rows, std::size_t cols, double scale, std::uint64_t seed,
                         Stream stream) {
    CounterRng rng(seed, CounterRng::key(stream));
    Eigen::MatrixXd m(idx(rows), idx(cols));
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index r = 0; r < m.rows(); ++r) {
            m(r, c) = rng.normal() * scale;
        }
    }
    return m;
}

AffineMap init_affine(std::size_t in, std::size_t out, std::uint64_t seed, Stream stream) {
    return {gaussian(in, out, 1.0 / std::sqrt(static_cast<double>(in)), seed, stream),
            Eigen::VectorXd::Zero(idx(out))};
}

CircuitParams init_circuit(const ModelDims& dims, std::uint64_t seed, Stream stream) {
    CircuitParams c(dims.qubits, dims.depth, dims.entangler, dims.rotation_order);
    CounterRng rng(seed, CounterRng::key(stream));
    for (double& a : c.angles()) {
        a = (2.0 * rng.uniform() - 1.0) * std::numbers::pi;
    }
    return c;
}

void check_qubits_for(std::size_t qubits, std::size_t rows, const char* what) {
    if (qubits == 0 || qubits >= 63 || (std::size_t{1} << qubits) < rows) {
        throw DimensionError(std::string(what) + ": need 2^U >= " + std::to_string(rows) +
                             ", got U = " + std::to_string(qubits));
    }
}

void check_affine(const AffineMap& m, std::size_t in, std::size_t out, const char* what) {
    if (m.in_dim() != in || m.out_dim() != out || static_cast<std::size_t>(m.bias.size()) != out) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(in) + " -> " +
                             std::to_string(out));
    }
}

void check_input(const Eigen::VectorXd& x, std::size_t d) {
    if (static_cast<std::size_t>(x.size()) != d) {
        throw DimensionError("input has length " + std::to_string(x.size()) + ", expected " +
                             std::to_string(d));
    }
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& h) { return h.cwiseMax(0.0); }

ModelOutput make_output(Eigen::VectorXd logits) {
    ModelOutput out;
    out.probabilities = softmax(logits);
    out.logits = std::move(logits);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

AffineMap AffineMap::zeros(std::size_t in, std::size_t out) {
    return {Eigen::MatrixXd::Zero(idx(in), idx(out)), Eigen::VectorXd::Zero(idx(out))};
}

Eigen::VectorXd AffineMap::apply(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != in_dim()) {
        throw DimensionError("affine map input has wrong length");
    }
    return weight.transpose() * x + bias;
}

Eigen::MatrixXd AffineMap::apply_columns(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.rows()) != in_dim()) {
        throw DimensionError("affine map input has wrong row count");
    }
    Eigen::MatrixXd y = weight.transpose() * x;
    y.colwise() += bias;
    return y;
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "vqc-mlpnet" || name == "hybrid") {
        return ModelKind::Hybrid;
    }
    if (name == "vqc") {
        return ModelKind::Vqc;
    }
    if (name == "mlp") {
        return ModelKind::Mlp;
    }
    if (name == "vqc-mlpnet-v2" || name == "v2") {
        return ModelKind::HybridV2;
    }
    throw ValueError("unknown model kind '" + std::string(name) + "'");
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Hybrid: return "vqc-mlpnet";
        case ModelKind::Vqc: return "vqc";
        case ModelKind::Mlp: return "mlp";
        case ModelKind::HybridV2: return "vqc-mlpnet-v2";
    }
    return "unknown";
}

std::size_t count_params(ModelKind kind, const ModelDims& d) {
    const std::size_t angles = 3 * d.qubits * d.depth;
    switch (kind) {
        case ModelKind::Hybrid:
            return angles + (d.qubits * d.hidden + d.hidden) + (d.hidden * d.classes + d.classes) +
                   (d.train_w1 ? d.hidden * d.input_dim : 0);
        case ModelKind::Vqc:
            return angles + d.qubits * d.classes + d.classes;
        case ModelKind::Mlp:
            return d.input_dim * d.hidden + d.hidden + d.hidden * d.classes + d.classes;
        case ModelKind::HybridV2:
            return 2 * angles + 2 * (d.qubits * d.hidden + d.hidden) + d.classes;
    }
    throw ValueError("unknown model kind");
}

// ---------------------------------------------------------------------------

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    if (logits.size() == 0) {
        throw DimensionError("softmax of an empty vector");
    }
    // std::exp underflows to exactly 0; Eigen's packet exp clamps to a denormal.
    const Eigen::ArrayXd e =
        (logits.array() - logits.maxCoeff()).unaryExpr([](double v) { return std::exp(v); });
    return (e / e.sum()).matrix();
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Index c = 0; c < logits.cols(); ++c) {
        p.col(c) = softmax(logits.col(c));
    }
    return p;
}

void sample_expectations(Eigen::MatrixXd& expectations, const MeasurementSpec& measurement) {
    if (measurement.mode != MeasurementMode::Sampled) {
        return;
    }
    for (Index d = 0; d < expectations.cols(); ++d) {
        for (Index q = 0; q < expectations.rows(); ++q) {
            expectations(q, d) = sample_from_expectation(
                expectations(q, d), measurement.shots, measurement.seed,
                CounterRng::key(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(q)));
        }
    }
}

GeneratedWeights generate_weights(const Eigen::MatrixXd& seed, const CircuitParams& circuit,
                                  const AffineMap& lin, const NoiseSpec& noise,
                                  const MeasurementSpec& measurement) {
    const std::size_t u = circuit.num_qubits();
    check_qubits_for(u, static_cast<std::size_t>(seed.rows()), "weight generation");
    check_affine(lin, u, static_cast<std::size_t>(seed.rows()), "f_lin");
    GeneratedWeights g;
    g.encoded.reserve(static_cast<std::size_t>(seed.cols()));
    for (Index d = 0; d < seed.cols(); ++d) {
        const Eigen::VectorXd col = seed.col(d);
        g.encoded.push_back(amplitude_encode(std::span<const double>(col.data(), col.size()), u));
    }
    g.expectations = batch_expectations(g.encoded, circuit, noise);
    sample_expectations(g.expectations, measurement);
    g.w1_hat = lin.apply_columns(g.expectations);
    if (!g.w1_hat.allFinite()) {
        throw NumericalError("generated weights contain non-finite entries");
    }
    return g;
}

ModelDims HybridModelParams::dims() const {
    ModelDims d;
    d.input_dim = static_cast<std::size_t>(w1.cols());
    d.hidden = static_cast<std::size_t>(w1.rows());
    d.classes = out.out_dim();
    d.qubits = circuit.num_qubits();
    d.depth = circuit.depth();
    d.train_w1 = train_w1;
    d.entangler = circuit.entangler();
    d.rotation_order = circuit.rotation_order();
    return d;
}

void HybridModelParams::validate() const {
    const std::size_t m = static_cast<std::size_t>(w1.rows());
    if (m == 0 || w1.cols() == 0) {
        throw DimensionError("W1 must be non-empty");
    }
    check_qubits_for(circuit.num_qubits(), m, "hybrid model");
    check_affine(lin, circuit.num_qubits(), m, "f_lin");
    if (out.in_dim() != m || out.out_dim() == 0) {
        throw DimensionError("output layer must map M -> J");
    }
}

GeneratedWeights generate_w1_hat(const HybridModelParams& params, const NoiseSpec& noise,
                                 const MeasurementSpec& measurement) {
    params.validate();
    return generate_weights(params.w1, params.circuit, params.lin, noise, measurement);
}

ModelOutput forward(const HybridModelParams& params, const Eigen::MatrixXd& w1_hat,
                    const Eigen::VectorXd& x) {
    if (w1_hat.rows() != params.w1.rows() || w1_hat.cols() != params.w1.cols()) {
        throw DimensionError("generated W1 has the wrong shape");
    }
    check_input(x, static_cast<std::size_t>(w1_hat.cols()));
    const double scale = 1.0 / std::sqrt(static_cast<double>(w1_hat.rows()));
    const Eigen::VectorXd a = relu(w1_hat * x);
    return make_output(params.out.weight.transpose() * a * scale + params.out.bias);
}

// ---------------------------------------------------------------------------

std::vector<StateVector> encode_vqc_inputs(const Eigen::MatrixXd& features, std::size_t qubits) {
    std::vector<StateVector> states;
    states.reserve(static_cast<std::size_t>(features.rows()));
    for (Index n = 0; n < features.rows(); ++n) {
        const Eigen::VectorXd z = reduce_input(features.row(n).transpose(), qubits);
        states.push_back(amplitude_encode(std::span<const double>(z.data(), z.size()), qubits));
    }
    return states;
}

void PlainVqcParams::validate() const {
    if (input_dim == 0) {
        throw DimensionError("plain VQC input dimension must be positive");
    }
    check_affine(head, circuit.num_qubits(), head.out_dim(), "VQC head");
    if (head.out_dim() == 0) {
        throw DimensionError("VQC head needs at least one class");
    }
}

Eigen::VectorXd reduce_input(const Eigen::VectorXd& x, std::size_t num_qubits) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    const auto d = static_cast<std::size_t>(x.size());
    if (d <= dim) {
        return x;
    }
    const std::size_t block = (d + dim - 1) / dim;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(idx((d + block - 1) / block));
    for (std::size_t i = 0; i < d; ++i) {
        z(idx(i / block)) += x(idx(i));
    }
    return z;
}

ModelOutput plain_vqc_forward(const Eigen::VectorXd& x, const CircuitParams& circuit,
                              const AffineMap& head, const NoiseSpec& noise) {
    check_affine(head, circuit.num_qubits(), head.out_dim(), "VQC head");
    const Eigen::VectorXd z = reduce_input(x, circuit.num_qubits());
    const StateVector psi =
        amplitude_encode(std::span<const double>(z.data(), z.size()), circuit.num_qubits());
    const auto e = noisy_expectations(psi, circuit, noise).values;
    const Eigen::VectorXd ev = Eigen::Map<const Eigen::VectorXd>(e.data(), idx(e.size()));
    return make_output(head.apply(ev));
}

ModelOutput mlp_forward(const Eigen::VectorXd& x, const AffineMap& l1, const AffineMap& l2) {
    check_input(x, l1.in_dim());
    if (l2.in_dim() != l1.out_dim()) {
        throw DimensionError("MLP layers do not chain");
    }
    return make_output(l2.apply(relu(l1.apply(x))));
}

// ---------------------------------------------------------------------------

ModelDims HybridV2Params::dims() const {
    ModelDims d;
    d.input_dim = static_cast<std::size_t>(w1.cols());
    d.hidden = static_cast<std::size_t>(w1.rows());
    d.classes = static_cast<std::size_t>(w2.cols());
    d.qubits = circuit1.num_qubits();
    d.depth = circuit1.depth();
    d.entangler = circuit1.entangler();
    d.rotation_order = circuit1.rotation_order();
    return d;
}

void HybridV2Params::validate() const {
    const auto m = static_cast<std::size_t>(w1.rows());
    const auto j = static_cast<std::size_t>(w2.cols());
    if (m == 0 || w1.cols() == 0 || j == 0) {
        throw DimensionError("v2 seed matrices must be non-empty");
    }
    if (static_cast<std::size_t>(w2.rows()) != m) {
        throw DimensionError("v2 W2 seed must have M rows");
    }
    check_qubits_for(circuit1.num_qubits(), m, "v2 first circuit");
    check_qubits_for(circuit2.num_qubits(), m, "v2 second circuit");
    check_affine(lin1, circuit1.num_qubits(), m, "v2 lin1");
    check_affine(lin2, circuit2.num_qubits(), m, "v2 lin2");
    if (static_cast<std::size_t>(out_bias.size()) != j) {
        throw DimensionError("v2 output bias must have length J");
    }
}

GeneratedWeightsV2 generate_v2(const HybridV2Params& params, const NoiseSpec& noise,
                               const MeasurementSpec& measurement) {
    params.validate();
    MeasurementSpec second = measurement;
    second.seed = mix64(measurement.seed ^ 0x5632ULL);
    return {generate_weights(params.w1, params.circuit1, params.lin1, noise, measurement),
            generate_weights(params.w2, params.circuit2, params.lin2, noise, second)};
}

ModelOutput v2_forward(const Eigen::VectorXd& x, const HybridV2Params& params,
                       const GeneratedWeightsV2& weights) {
    const Eigen::MatrixXd& w1_hat = weights.first.w1_hat;
    const Eigen::MatrixXd& w2_hat = weights.second.w1_hat;
    check_input(x, static_cast<std::size_t>(w1_hat.cols()));
    if (w2_hat.rows() != w1_hat.rows() || w2_hat.cols() != params.out_bias.size()) {
        throw DimensionError("generated W2 has the wrong shape");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(w1_hat.rows()));
    const Eigen::VectorXd a = relu(w1_hat * x);
    return make_output(w2_hat.transpose() * a * scale + params.out_bias);
}

// ---------------------------------------------------------------------------

ModelKind kind_of(const AnyModel& model) {
    return static_cast<ModelKind>(model.index());
}

HybridModelParams init_hybrid(const ModelDims& d, std::uint64_t seed) {
    check_qubits_for(d.qubits, d.hidden, "hybrid model");
    HybridModelParams p{gaussian(d.hidden, d.input_dim, 1.0 / std::sqrt(static_cast<double>(d.hidden)),
                                 seed, kW1),
                        init_circuit(d, seed, kAngles), init_affine(d.qubits, d.hidden, seed, kLin),
                        init_affine(d.hidden, d.classes, seed, kOut), d.train_w1};
    p.validate();
    return p;
}

PlainVqcParams init_plain_vqc(const ModelDims& d, std::uint64_t seed) {
    PlainVqcParams p{d.input_dim, init_circuit(d, seed, kAngles),
                     init_affine(d.qubits, d.classes, seed, kHead)};
    p.validate();
    return p;
}

MlpParams init_mlp(const ModelDims& d, std::uint64_t seed) {
    if (d.input_dim == 0 || d.hidden == 0 || d.classes == 0) {
        throw DimensionError("MLP dimensions must be positive");
    }
    return {init_affine(d.input_dim, d.hidden, seed, kL1),
            init_affine(d.hidden, d.classes, seed, kL2)};
}

HybridV2Params init_v2(const ModelDims& d, std::uint64_t seed) {
    check_qubits_for(d.qubits, d.hidden, "v2 model");
    const double s = 1.0 / std::sqrt(static_cast<double>(d.hidden));
    HybridV2Params p{gaussian(d.hidden, d.input_dim, s, seed, kW1),
                     init_circuit(d, seed, kAngles),
                     init_affine(d.qubits, d.hidden, seed, kLin),
                     gaussian(d.hidden, d.classes, s, seed, kW2Seed),
                     init_circuit(d, seed, kAngles2),
                     init_affine(d.qubits, d.hidden, seed, kLin2),
                     Eigen::VectorXd::Zero(idx(d.classes))};
    p.validate();
    return p;
}

AnyModel init_model(ModelKind kind, const ModelDims& dims, std::uint64_t seed) {
    switch (kind) {
        case ModelKind::Hybrid: return init_hybrid(dims, seed);
        case ModelKind::Vqc: return init_plain_vqc(dims, seed);
        case ModelKind::Mlp: return init_mlp(dims, seed);
        case ModelKind::HybridV2: return init_v2(dims, seed);
    }
    throw ValueError("unknown model kind");
}

namespace {

std::span<double> view(Eigen::MatrixXd& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> view(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

std::vector<ParamBlock> trainable_blocks(AnyModel& model) {
    struct Visitor {
        std::vector<ParamBlock> operator()(HybridModelParams& p) const {
            std::vector<ParamBlock> b{{"angles", p.circuit.angles()},
                                      {"lin.weight", view(p.lin.weight)},
                                      {"lin.bias", view(p.lin.bias)},
                                      {"w2.weight", view(p.out.weight)},
                                      {"w2.bias", view(p.out.bias)}};
            if (p.train_w1) {
                b.push_back({"w1", view(p.w1)});
            }
            return b;
        }
        std::vector<ParamBlock> operator()(PlainVqcParams& p) const {
            return {{"angles", p.circuit.angles()},
                    {"head.weight", view(p.head.weight)},
                    {"head.bias", view(p.head.bias)}};
        }
        std::vector<ParamBlock> operator()(MlpParams& p) const {
            return {{"l1.weight", view(p.l1.weight)},
                    {"l1.bias", view(p.l1.bias)},
                    {"l2.weight", view(p.l2.weight)},
                    {"l2.bias", view(p.l2.bias)}};
        }
        std::vector<ParamBlock> operator()(HybridV2Params& p) const {
            return {{"angles", p.circuit1.angles()},
                    {"lin.weight", view(p.lin1.weight)},
                    {"lin.bias", view(p.lin1.bias)},
                    {"angles2", p.circuit2.angles()},
                    {"lin2.weight", view(p.lin2.weight)},
                    {"lin2.bias", view(p.lin2.bias)},
                    {"w2.bias", view(p.out_bias)}};
        }
    };
    return std::visit(Visitor{}, model);
}

std::size_t trainable_count(const AnyModel& model) {
    AnyModel copy = model;
    std::size_t n = 0;
    for (const auto& b : trainable_blocks(copy)) {
        n += b.values.size();
    }
    return n;
}

Eigen::MatrixXd predict(const AnyModel& model, const Eigen::MatrixXd& features,
                        const NoiseSpec& noise, const MeasurementSpec& measurement) {
    struct Visitor {
        const Eigen::MatrixXd& x;
        const NoiseSpec& noise;
        const MeasurementSpec& meas;

        Eigen::MatrixXd operator()(const HybridModelParams& p) const {
            const auto g = generate_w1_hat(p, noise, meas);
            if (x.cols() != g.w1_hat.cols()) {
                throw DimensionError("feature width does not match the model input dimension");
            }
            const double scale = 1.0 / std::sqrt(static_cast<double>(g.w1_hat.rows()));
            Eigen::MatrixXd logits = p.out.weight.transpose() * relu(g.w1_hat * x.transpose()) * scale;
            logits.colwise() += p.out.bias;
            return softmax_columns(logits);
        }
        Eigen::MatrixXd operator()(const PlainVqcParams& p) const {
            p.validate();
            if (static_cast<std::size_t>(x.cols()) != p.input_dim) {
                throw DimensionError("feature width does not match the model input dimension");
            }
            const auto states = encode_vqc_inputs(x, p.circuit.num_qubits());
            Eigen::MatrixXd e = batch_expectations(states, p.circuit, noise);
            sample_expectations(e, meas);
            return softmax_columns(p.head.apply_columns(e));
        }
        Eigen::MatrixXd operator()(const MlpParams& p) const {
            if (static_cast<std::size_t>(x.cols()) != p.l1.in_dim()) {
                throw DimensionError("feature width does not match the model input dimension");
            }
            return softmax_columns(p.l2.apply_columns(relu(p.l1.apply_columns(x.transpose()))));
        }
        Eigen::MatrixXd operator()(const HybridV2Params& p) const {
            const auto g = generate_v2(p, noise, meas);
            if (x.cols() != g.first.w1_hat.cols()) {
                throw DimensionError("feature width does not match the model input dimension");
            }
            const double scale = 1.0 / std::sqrt(static_cast<double>(g.first.w1_hat.rows()));
            Eigen::MatrixXd logits =
                g.second.w1_hat.transpose() * relu(g.first.w1_hat * x.transpose()) * scale;
            logits.colwise() += p.out_bias;
            return softmax_columns(logits);
        }
    };
    return std::visit(Visitor{features, noise, measurement}, model);
}

}  // namespace qmlp
