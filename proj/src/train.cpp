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

#include "qmlp/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "qmlp/error.hpp"
#include "qmlp/log.hpp"
#include "qmlp/parallel.hpp"
#include "qmlp/rng.hpp"

namespace qmlp {

namespace {

using Index = Eigen::Index;

constexpr std::uint64_t kShuffleStream = 0x73687566ULL;
constexpr std::uint64_t kShotStream = 0x73686f74ULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;

Index idx(std::size_t v) { return static_cast<Index>(v); }

std::vector<double> flatten(const Eigen::MatrixXd& m) {
    return {m.data(), m.data() + m.size()};
}

Eigen::MatrixXd one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(idx(classes), idx(labels.size()));
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] >= classes) {
            throw IndexError("label " + std::to_string(labels[n]) + " out of range for " +
                             std::to_string(classes) + " classes");
        }
        y(idx(labels[n]), idx(n)) = 1.0;
    }
    return y;
}

// Mean cross-entropy and its logit cotangent (P - Y) / B.
double loss_and_delta(const Eigen::MatrixXd& logits, const std::vector<std::size_t>& labels,
                      Eigen::MatrixXd* delta) {
    if (labels.empty()) {
        throw ValueError("empty batch");
    }
    const Eigen::MatrixXd p = softmax_columns(logits);
    const Eigen::MatrixXd y = one_hot(labels, static_cast<std::size_t>(logits.rows()));
    double loss = 0.0;
    for (std::size_t n = 0; n < labels.size(); ++n) {
        loss += cross_entropy(p.col(idx(n)), labels[n]);
    }
    const auto b = static_cast<double>(labels.size());
    if (delta != nullptr) {
        *delta = (p - y) / b;
    }
    return loss / b;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& h) { return h.cwiseMax(0.0); }

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& h) {
    return (h.array() > 0.0).cast<double>().matrix();
}


// Circuit-angle VJP: adjoint (exact) or the shift rule on sampled readouts.
BatchVjp circuit_vjp(const std::vector<StateVector>& states, const Eigen::MatrixXd& cot,
                     const CircuitParams& circuit, const NoiseSpec& noise,
                     const MeasurementSpec& meas, bool want_state_grads) {
    if (meas.mode == MeasurementMode::Exact) {
        return batch_vjp(states, cot, circuit, noise, want_state_grads);
    }
    if (want_state_grads) {
        throw ValueError("training W1 is not supported with sampled measurements");
    }
    BatchVjp out;
    out.angle_grad.assign(circuit.num_angles(), 0.0);
    CircuitParams shifted = circuit;
    for (std::size_t p = 0; p < circuit.num_angles(); ++p) {
        const double base = circuit.angles()[p];
        Eigen::MatrixXd e[2];
        for (int side = 0; side < 2; ++side) {
            shifted.angles()[p] = base + (side == 0 ? 1.0 : -1.0) * std::numbers::pi / 2.0;
            e[side] = batch_expectations(states, shifted, noise);
            MeasurementSpec m = meas;
            m.seed = CounterRng::key(meas.seed, kShotStream, 2 * p + static_cast<std::size_t>(side));
            sample_expectations(e[side], m);
        }
        shifted.angles()[p] = base;
        out.angle_grad[p] = 0.5 * (cot.array() * (e[0] - e[1]).array()).sum();
    }
    return out;
}

// d(loss)/d(W1) through the encoding normalization psi = w / |w|.
Eigen::MatrixXd w1_gradient(const Eigen::MatrixXd& w1, const BatchVjp& vjp) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(w1.rows(), w1.cols());
    for (Index d = 0; d < w1.cols(); ++d) {
        const double norm = w1.col(d).norm();
        if (norm < kDegenerateNorm) {
            continue;
        }
        const Eigen::VectorXd psi = w1.col(d) / norm;
        const Eigen::VectorXd s =
            Eigen::Map<const Eigen::VectorXd>(vjp.state_grads[static_cast<std::size_t>(d)].data(),
                                              w1.rows());
        g.col(d) = (s - psi * psi.dot(s)) / norm;
    }
    return g;
}

struct GradientBuilder {
    Gradient grad;
    void add(std::string name, std::vector<double> values) {
        grad.names.push_back(std::move(name));
        grad.blocks.push_back(std::move(values));
    }
};

Gradient hybrid_backward(const HybridModelParams& p, const Eigen::MatrixXd& x,
                         const std::vector<std::size_t>& labels, const NoiseSpec& noise,
                         const MeasurementSpec& meas, bool want_grad) {
    const GeneratedWeights g = generate_w1_hat(p, noise, meas);
    if (x.cols() != g.w1_hat.cols()) {
        throw DimensionError("feature width does not match the model input dimension");
    }
    const double s = 1.0 / std::sqrt(static_cast<double>(g.w1_hat.rows()));
    const Eigen::MatrixXd h = g.w1_hat * x.transpose();
    const Eigen::MatrixXd a = relu(h);
    Eigen::MatrixXd logits = p.out.weight.transpose() * a * s;
    logits.colwise() += p.out.bias;
    Eigen::MatrixXd dl;
    GradientBuilder b;
    b.grad.loss = loss_and_delta(logits, labels, want_grad ? &dl : nullptr);
    if (!want_grad) {
        return b.grad;
    }
    const Eigen::MatrixXd g_w2 = a * dl.transpose() * s;
    const Eigen::VectorXd g_b2 = dl.rowwise().sum();
    const Eigen::MatrixXd dh = ((p.out.weight * dl * s).array() * relu_mask(h).array()).matrix();
    const Eigen::MatrixXd g_w1_hat = dh * x;
    const Eigen::VectorXd g_lin_b = g_w1_hat.rowwise().sum();
    const Eigen::MatrixXd g_lin_w = g.expectations * g_w1_hat.transpose();
    const Eigen::MatrixXd g_e = p.lin.weight * g_w1_hat;
    const BatchVjp vjp = circuit_vjp(g.encoded, g_e, p.circuit, noise, meas, p.train_w1);
    b.add("angles", vjp.angle_grad);
    b.add("lin.weight", flatten(g_lin_w));
    b.add("lin.bias", flatten(g_lin_b));
    b.add("w2.weight", flatten(g_w2));
    b.add("w2.bias", flatten(g_b2));
    if (p.train_w1) {
        b.add("w1", flatten(w1_gradient(p.w1, vjp)));
    }
    return b.grad;
}

Gradient vqc_backward(const PlainVqcParams& p, const Eigen::MatrixXd& x,
                      const std::vector<std::size_t>& labels, const NoiseSpec& noise,
                      const MeasurementSpec& meas, bool want_grad) {
    p.validate();
    if (static_cast<std::size_t>(x.cols()) != p.input_dim) {
        throw DimensionError("feature width does not match the model input dimension");
    }
    const auto states = encode_vqc_inputs(x, p.circuit.num_qubits());
    Eigen::MatrixXd e = batch_expectations(states, p.circuit, noise);
    sample_expectations(e, meas);
    const Eigen::MatrixXd logits = p.head.apply_columns(e);
    Eigen::MatrixXd dl;
    GradientBuilder b;
    b.grad.loss = loss_and_delta(logits, labels, want_grad ? &dl : nullptr);
    if (!want_grad) {
        return b.grad;
    }
    const Eigen::MatrixXd g_e = p.head.weight * dl;
    const BatchVjp vjp = circuit_vjp(states, g_e, p.circuit, noise, meas, false);
    b.add("angles", vjp.angle_grad);
    b.add("head.weight", flatten(e * dl.transpose()));
    b.add("head.bias", flatten(Eigen::VectorXd(dl.rowwise().sum())));
    return b.grad;
}

Gradient mlp_backward(const MlpParams& p, const Eigen::MatrixXd& x,
                      const std::vector<std::size_t>& labels, bool want_grad) {
    if (static_cast<std::size_t>(x.cols()) != p.l1.in_dim()) {
        throw DimensionError("feature width does not match the model input dimension");
    }
    const Eigen::MatrixXd h = p.l1.apply_columns(x.transpose());
    const Eigen::MatrixXd a = relu(h);
    const Eigen::MatrixXd logits = p.l2.apply_columns(a);
    Eigen::MatrixXd dl;
    GradientBuilder b;
    b.grad.loss = loss_and_delta(logits, labels, want_grad ? &dl : nullptr);
    if (!want_grad) {
        return b.grad;
    }
    const Eigen::MatrixXd dh = ((p.l2.weight * dl).array() * relu_mask(h).array()).matrix();
    b.add("l1.weight", flatten(x.transpose() * dh.transpose()));
    b.add("l1.bias", flatten(Eigen::VectorXd(dh.rowwise().sum())));
    b.add("l2.weight", flatten(a * dl.transpose()));
    b.add("l2.bias", flatten(Eigen::VectorXd(dl.rowwise().sum())));
    return b.grad;
}

Gradient v2_backward(const HybridV2Params& p, const Eigen::MatrixXd& x,
                     const std::vector<std::size_t>& labels, const NoiseSpec& noise,
                     const MeasurementSpec& meas, bool want_grad) {
    const GeneratedWeightsV2 g = generate_v2(p, noise, meas);
    const Eigen::MatrixXd& w1_hat = g.first.w1_hat;
    const Eigen::MatrixXd& w2_hat = g.second.w1_hat;
    if (x.cols() != w1_hat.cols()) {
        throw DimensionError("feature width does not match the model input dimension");
    }
    const double s = 1.0 / std::sqrt(static_cast<double>(w1_hat.rows()));
    const Eigen::MatrixXd h = w1_hat * x.transpose();
    const Eigen::MatrixXd a = relu(h);
    Eigen::MatrixXd logits = w2_hat.transpose() * a * s;
    logits.colwise() += p.out_bias;
    Eigen::MatrixXd dl;
    GradientBuilder b;
    b.grad.loss = loss_and_delta(logits, labels, want_grad ? &dl : nullptr);
    if (!want_grad) {
        return b.grad;
    }
    // Second generator.
    const Eigen::MatrixXd g_w2_hat = a * dl.transpose() * s;
    const Eigen::VectorXd g_lin2_b = g_w2_hat.rowwise().sum();
    const Eigen::MatrixXd g_lin2_w = g.second.expectations * g_w2_hat.transpose();
    const Eigen::MatrixXd g_e2 = p.lin2.weight * g_w2_hat;
    MeasurementSpec meas2 = meas;
    meas2.seed = mix64(meas.seed ^ 0x5632ULL);
    const BatchVjp vjp2 = circuit_vjp(g.second.encoded, g_e2, p.circuit2, noise, meas2, false);
    // First generator.
    const Eigen::MatrixXd dh = ((w2_hat * dl * s).array() * relu_mask(h).array()).matrix();
    const Eigen::MatrixXd g_w1_hat = dh * x;
    const Eigen::VectorXd g_lin1_b = g_w1_hat.rowwise().sum();
    const Eigen::MatrixXd g_lin1_w = g.first.expectations * g_w1_hat.transpose();
    const Eigen::MatrixXd g_e1 = p.lin1.weight * g_w1_hat;
    const BatchVjp vjp1 = circuit_vjp(g.first.encoded, g_e1, p.circuit1, noise, meas, false);
    b.add("angles", vjp1.angle_grad);
    b.add("lin.weight", flatten(g_lin1_w));
    b.add("lin.bias", flatten(g_lin1_b));
    b.add("angles2", vjp2.angle_grad);
    b.add("lin2.weight", flatten(g_lin2_w));
    b.add("lin2.bias", flatten(g_lin2_b));
    b.add("w2.bias", flatten(Eigen::VectorXd(dl.rowwise().sum())));
    return b.grad;
}

Gradient run_backward(const AnyModel& model, const Eigen::MatrixXd& x,
                      const std::vector<std::size_t>& labels, const NoiseSpec& noise,
                      const MeasurementSpec& meas, bool want_grad) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        throw DimensionError("batch features and labels disagree");
    }
    struct Visitor {
        const Eigen::MatrixXd& x;
        const std::vector<std::size_t>& labels;
        const NoiseSpec& noise;
        const MeasurementSpec& meas;
        bool want;
        Gradient operator()(const HybridModelParams& p) const {
            return hybrid_backward(p, x, labels, noise, meas, want);
        }
        Gradient operator()(const PlainVqcParams& p) const {
            return vqc_backward(p, x, labels, noise, meas, want);
        }
        Gradient operator()(const MlpParams& p) const { return mlp_backward(p, x, labels, want); }
        Gradient operator()(const HybridV2Params& p) const {
            return v2_backward(p, x, labels, noise, meas, want);
        }
    };
    return std::visit(Visitor{x, labels, noise, meas, want_grad}, model);
}

bool is_frozen(const std::string& name, const std::vector<std::string>& frozen) {
    return std::find(frozen.begin(), frozen.end(), name) != frozen.end();
}

void check_layout(const std::vector<ParamBlock>& params, const Gradient& grad) {
    if (params.size() != grad.blocks.size()) {
        throw DimensionError("gradient and parameters have different block counts");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].name != grad.names[i] || params[i].values.size() != grad.blocks[i].size()) {
            throw DimensionError("gradient block '" + grad.names[i] + "' does not match parameters");
        }
    }
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

// ---------------------------------------------------------------------------

double cross_entropy(const Eigen::VectorXd& probabilities, std::size_t label) {
    if (label >= static_cast<std::size_t>(probabilities.size())) {
        throw IndexError("label " + std::to_string(label) + " out of range");
    }
    return -std::log(std::max(probabilities(idx(label)), kProbabilityFloor));
}

const std::vector<double>& Gradient::block(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return blocks[i];
        }
    }
    throw ValueError("no gradient block named '" + std::string(name) + "'");
}

std::vector<double> Gradient::flat() const {
    std::vector<double> out;
    for (const auto& b : blocks) {
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

bool Gradient::all_finite() const {
    if (!std::isfinite(loss)) {
        return false;
    }
    for (const auto& b : blocks) {
        for (double v : b) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
    }
    return true;
}

Gradient backward(const AnyModel& model, const Eigen::MatrixXd& features,
                  const std::vector<std::size_t>& labels, const NoiseSpec& noise,
                  const MeasurementSpec& measurement) {
    return run_backward(model, features, labels, noise, measurement, true);
}

double mean_loss(const AnyModel& model, const Eigen::MatrixXd& features,
                 const std::vector<std::size_t>& labels, const NoiseSpec& noise,
                 const MeasurementSpec& measurement) {
    return run_backward(model, features, labels, noise, measurement, false).loss;
}

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "adam") {
        return OptimizerKind::Adam;
    }
    if (name == "sgd" || name == "gd") {
        return OptimizerKind::Sgd;
    }
    throw ValueError("unknown optimizer '" + std::string(name) + "'");
}

void adam_step(std::vector<ParamBlock>& params, const Gradient& grad, AdamState& state, double lr,
               const std::vector<std::string>& frozen) {
    check_layout(params, grad);
    if (state.m.empty()) {
        for (const auto& b : grad.blocks) {
            state.m.emplace_back(b.size(), 0.0);
            state.v.emplace_back(b.size(), 0.0);
        }
    }
    if (state.m.size() != grad.blocks.size()) {
        throw DimensionError("optimizer state does not match the gradient layout");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.m[i].size() != grad.blocks[i].size()) {
            throw DimensionError("optimizer state does not match the gradient layout");
        }
        if (is_frozen(params[i].name, frozen)) {
            continue;
        }
        for (std::size_t k = 0; k < params[i].values.size(); ++k) {
            const double g = grad.blocks[i][k];
            double& m = state.m[i][k];
            double& v = state.v[i][k];
            m = state.beta1 * m + (1.0 - state.beta1) * g;
            v = state.beta2 * v + (1.0 - state.beta2) * g * g;
            params[i].values[k] -= lr * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
        }
    }
}

void sgd_step(std::vector<ParamBlock>& params, const Gradient& grad, double lr,
              const std::vector<std::string>& frozen) {
    check_layout(params, grad);
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (is_frozen(params[i].name, frozen)) {
            continue;
        }
        for (std::size_t k = 0; k < params[i].values.size(); ++k) {
            params[i].values[k] -= lr * grad.blocks[i][k];
        }
    }
}

void TrainingConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ValueError("learning rate must be positive");
    }
    if (seeds.empty()) {
        throw ValueError("at least one seed is required");
    }
    if (measurement.mode == MeasurementMode::Sampled && measurement.shots == 0) {
        throw ValueError("sampled measurement needs shots >= 1");
    }
    noise.validate();
}

Evaluation evaluate(const AnyModel& model, const Dataset& data, const NoiseSpec& noise,
                    const MeasurementSpec& measurement) {
    data.validate();
    const Eigen::MatrixXd p = predict(model, data.features, noise, measurement);
    Evaluation ev;
    std::size_t correct = 0;
    for (std::size_t n = 0; n < data.size(); ++n) {
        ev.loss += cross_entropy(p.col(idx(n)), data.labels[n]);
        Index best = 0;
        p.col(idx(n)).maxCoeff(&best);
        correct += static_cast<std::size_t>(best) == data.labels[n] ? 1 : 0;
    }
    const auto n = static_cast<double>(data.size());
    ev.loss /= n;
    ev.accuracy = static_cast<double>(correct) / n;
    return ev;
}

SeedRun fit_model(AnyModel model, const Dataset& train, const Dataset& test,
                  const TrainingConfig& config, std::vector<MetricsRecord>& records) {
    config.validate();
    train.validate();
    const std::uint64_t seed = config.seeds.front();
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::string> frozen =
        config.freeze_angles ? std::vector<std::string>{"angles", "angles2"} : std::vector<std::string>{};
    SeedRun run{seed, std::move(model), false, {}};

    auto elapsed_ms = [&] {
        if (!config.record_timing) {
            return 0.0;
        }
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    };
    auto eval_measurement = [&](std::size_t epoch) {
        MeasurementSpec m = config.measurement;
        m.seed = CounterRng::key(config.measurement.seed ^ seed, kEvalStream, epoch);
        return m;
    };
    auto record = [&](std::size_t epoch) {
        for (const Dataset* ds : {&train, &test}) {
            if (ds->size() == 0) {
                continue;
            }
            const Evaluation ev = evaluate(run.model, *ds, config.noise, eval_measurement(epoch));
            const std::string split = ds == &train ? "train" : "test";
            records.push_back({epoch, split, seed, ev.loss, ev.accuracy, elapsed_ms()});
            if (!std::isfinite(ev.loss) || ev.loss > kDivergenceThreshold) {
                run.diverged = true;
                run.failure = "diverged at epoch " + std::to_string(epoch) + " (" + split +
                              " loss " + std::to_string(ev.loss) + ")";
            }
        }
        return !run.diverged;
    };

    if (!record(0)) {
        warn("seed " + std::to_string(seed) + ": " + run.failure);
        return run;
    }
    const std::size_t n = train.size();
    const std::size_t batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);
    AdamState adam;
    std::size_t step = 0;
    std::vector<std::size_t> order(n);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (batch < n) {
            CounterRng rng(seed, CounterRng::key(kShuffleStream, epoch));
            for (std::size_t i = n; i > 1; --i) {
                std::swap(order[i - 1], order[rng() % i]);
            }
        }
        for (std::size_t begin = 0; begin < n; begin += batch) {
            const std::size_t end = std::min(begin + batch, n);
            Eigen::MatrixXd xb(idx(end - begin), train.features.cols());
            std::vector<std::size_t> yb;
            yb.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                xb.row(idx(i - begin)) = train.features.row(idx(order[i]));
                yb.push_back(train.labels[order[i]]);
            }
            MeasurementSpec meas = config.measurement;
            meas.seed = CounterRng::key(config.measurement.seed ^ seed, kShotStream, step);
            const Gradient grad = backward(run.model, xb, yb, config.noise, meas);
            ++step;
            if (!grad.all_finite() || grad.loss > kDivergenceThreshold) {
                run.diverged = true;
                run.failure = "diverged at epoch " + std::to_string(epoch) + " step " +
                              std::to_string(step) + " (batch loss " + std::to_string(grad.loss) + ")";
                warn("seed " + std::to_string(seed) + ": " + run.failure);
                return run;
            }
            auto params = trainable_blocks(run.model);
            if (config.optimizer == OptimizerKind::Adam) {
                adam_step(params, grad, adam, config.learning_rate, frozen);
            } else {
                sgd_step(params, grad, config.learning_rate, frozen);
            }
        }
        if (!record(epoch)) {
            warn("seed " + std::to_string(seed) + ": " + run.failure);
            return run;
        }
    }
    return run;
}

FitResult fit(ModelKind kind, const ModelDims& dims, const Dataset& train, const Dataset& test,
              const TrainingConfig& config) {
    config.validate();
    // Seeds are independent jobs; records are merged in seed order.
    const std::size_t n = config.seeds.size();
    std::vector<std::vector<MetricsRecord>> per_seed(n);
    std::vector<std::optional<SeedRun>> runs(n);
    parallel_for(n, [&](std::size_t i) {
        TrainingConfig single = config;
        single.seeds = {config.seeds[i]};
        runs[i] = fit_model(init_model(kind, dims, config.seeds[i]), train, test, single, per_seed[i]);
    });
    FitResult result;
    for (std::size_t i = 0; i < n; ++i) {
        result.records.insert(result.records.end(), per_seed[i].begin(), per_seed[i].end());
        result.runs.push_back(std::move(*runs[i]));
    }
    return result;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records) {
    std::map<std::pair<std::size_t, std::string>, std::pair<std::vector<double>, std::vector<double>>>
        groups;
    for (const auto& r : records) {
        auto& g = groups[{r.epoch, r.split}];
        g.first.push_back(r.loss);
        g.second.push_back(r.accuracy);
    }
    std::vector<SummaryRow> rows;
    for (const auto& [key, values] : groups) {
        rows.push_back({key.first, key.second, values.first.size(), mean(values.first),
                        sample_std(values.first), mean(values.second), sample_std(values.second)});
    }
    return rows;
}

std::optional<SummaryRow> final_summary(const std::vector<SummaryRow>& rows, std::string_view split) {
    std::optional<SummaryRow> best;
    for (const auto& r : rows) {
        if (r.split == split && (!best || r.epoch > best->epoch)) {
            best = r;
        }
    }
    return best;
}

}  // namespace qmlp
