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

#include "qmlp/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmlp/bounds.hpp"
#include "qmlp/checkpoint.hpp"
#include "qmlp/error.hpp"
#include "qmlp/log.hpp"
#include "qmlp/parallel.hpp"
#include "qmlp/ntk.hpp"

namespace qmlp {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string seed_list(const std::vector<std::uint64_t>& seeds) {
    std::string s;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        s += (i ? "," : "") + std::to_string(seeds[i]);
    }
    return s;
}

json header_json(const ExperimentConfig& c) {
    return {{"version", kArtifactVersion},
            {"config_hash", hex(config_hash(c))},
            {"seeds", c.training.seeds}};
}

std::vector<std::string> header_lines(const ExperimentConfig& c) {
    return {kArtifactVersion, "config_hash " + hex(config_hash(c)),
            "seeds " + seed_list(c.training.seeds)};
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json summary_rows_json(const std::vector<SummaryRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"epoch", r.epoch},
                       {"split", r.split},
                       {"runs", r.runs},
                       {"loss_mean", r.loss_mean},
                       {"loss_std", r.loss_std},
                       {"accuracy_mean", r.accuracy_mean},
                       {"accuracy_std", r.accuracy_std}});
    }
    return arr;
}

json final_json(const std::vector<SummaryRow>& rows) {
    json f = json::object();
    for (const char* split : {"train", "test"}) {
        if (const auto r = final_summary(rows, split)) {
            f[split] = {{"epoch", r->epoch},
                        {"loss_mean", r->loss_mean},
                        {"loss_std", r->loss_std},
                        {"accuracy_mean", r->accuracy_mean},
                        {"accuracy_std", r->accuracy_std}};
        }
    }
    return f;
}

void warn_if_large(const ExperimentConfig& c) {
    const bool quantum = c.model != ModelKind::Mlp;
    if ((quantum && c.dims.qubits > 12) || c.dims.hidden > 1024) {
        warn("large dimensions (U = " + std::to_string(c.dims.qubits) + ", M = " +
             std::to_string(c.dims.hidden) + ") are legal but slow on a desk machine");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::finalize() {
    if (seed_count == 0) {
        throw ValueError("at least one seed is required");
    }
    training.seeds.clear();
    for (std::size_t i = 0; i < seed_count; ++i) {
        training.seeds.push_back(base_seed + i);
    }
    if (shots > 0) {
        training.measurement.mode = MeasurementMode::Sampled;
        training.measurement.shots = shots;
    } else {
        training.measurement.mode = MeasurementMode::Exact;
    }
}

std::string config_to_json(const ExperimentConfig& c) {
    json j = {{"task", c.task},
              {"data", c.data_path.string()},
              {"count", c.count},
              {"resolution", c.resolution},
              {"data_noise", c.data_noise},
              {"data_seed", c.data_seed},
              {"test_fraction", c.test_fraction},
              {"motif", c.motif},
              {"model", model_kind_name(c.model)},
              {"qubits", c.dims.qubits},
              {"depth", c.dims.depth},
              {"hidden", c.dims.hidden},
              {"classes", c.dims.classes},
              {"train_w1", c.dims.train_w1},
              {"entangler", entangler_name(c.dims.entangler)},
              {"rotation_order", rotation_order_name(c.dims.rotation_order)},
              {"lr", c.training.learning_rate},
              {"epochs", c.training.epochs},
              {"batch_size", c.training.batch_size},
              {"seeds", c.seed_count},
              {"seed", c.base_seed},
              {"optimizer", c.training.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
              {"shots", c.shots},
              {"adr", c.training.noise.adr},
              {"pdr", c.training.noise.pdr},
              {"freeze_angles", c.training.freeze_angles}};
    return j.dump();
}

void apply_config_json(ExperimentConfig& c, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ParseError("config must be a JSON object");
    }
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "task") c.task = v.get<std::string>();
            else if (key == "data") c.data_path = v.get<std::string>();
            else if (key == "count") c.count = v.get<std::size_t>();
            else if (key == "resolution") c.resolution = v.get<std::size_t>();
            else if (key == "data_noise") c.data_noise = v.get<double>();
            else if (key == "data_seed") c.data_seed = v.get<std::uint64_t>();
            else if (key == "test_fraction") c.test_fraction = v.get<double>();
            else if (key == "motif") c.motif = v.get<std::string>();
            else if (key == "model") c.model = parse_model_kind(v.get<std::string>());
            else if (key == "qubits") c.dims.qubits = v.get<std::size_t>();
            else if (key == "depth") c.dims.depth = v.get<std::size_t>();
            else if (key == "hidden") c.dims.hidden = v.get<std::size_t>();
            else if (key == "classes") c.dims.classes = v.get<std::size_t>();
            else if (key == "train_w1") c.dims.train_w1 = v.get<bool>();
            else if (key == "entangler") c.dims.entangler = parse_entangler(v.get<std::string>());
            else if (key == "rotation_order") c.dims.rotation_order = parse_rotation_order(v.get<std::string>());
            else if (key == "lr") c.training.learning_rate = v.get<double>();
            else if (key == "epochs") c.training.epochs = v.get<std::size_t>();
            else if (key == "batch_size") c.training.batch_size = v.get<std::size_t>();
            else if (key == "seeds") c.seed_count = v.get<std::size_t>();
            else if (key == "seed") c.base_seed = v.get<std::uint64_t>();
            else if (key == "optimizer") c.training.optimizer = parse_optimizer(v.get<std::string>());
            else if (key == "shots") c.shots = v.get<std::size_t>();
            else if (key == "adr") c.training.noise.adr = v.get<double>();
            else if (key == "pdr") c.training.noise.pdr = v.get<double>();
            else if (key == "freeze_angles") c.training.freeze_angles = v.get<bool>();
            else if (key == "timing") c.training.record_timing = v.get<bool>();
            else if (key == "out") c.out = v.get<std::string>();
            else throw ParseError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("config value has the wrong type: ") + e.what());
    }
}

std::uint64_t config_hash(const ExperimentConfig& config) { return fnv1a(config_to_json(config)); }

std::pair<Dataset, Dataset> prepare_data(ExperimentConfig& c) {
    Dataset all;
    if (c.task == "dots") {
        all = diagrams_to_dataset(gen_diagrams(c.count, c.resolution, c.data_noise, c.data_seed));
    } else if (c.task == "dna") {
        all = dna_to_dataset(gen_dna(c.count, c.motif, c.data_seed));
    } else if (c.task == "file") {
        if (c.data_path.empty()) {
            throw ValueError("task 'file' needs --data");
        }
        all = load_dataset(c.data_path);
    } else {
        throw ValueError("unknown task '" + c.task + "' (expected dots, dna or file)");
    }
    c.dims.input_dim = all.dim();
    if (all.num_classes() > c.dims.classes) {
        throw ValueError("dataset has " + std::to_string(all.num_classes()) +
                         " classes but the model is configured for " + std::to_string(c.dims.classes));
    }
    return split_dataset(all, c.test_fraction, c.data_seed);
}

std::string metrics_csv(const std::vector<MetricsRecord>& records, const ExperimentConfig& config) {
    std::ostringstream os;
    for (const auto& h : header_lines(config)) {
        os << "# " << h << '\n';
    }
    os << "epoch,split,seed,loss,accuracy,wall_time_ms\n";
    for (const auto& r : records) {
        os << r.epoch << ',' << r.split << ',' << r.seed << ',' << format_number(r.loss) << ','
           << format_number(r.accuracy) << ',' << format_number(r.wall_time_ms) << '\n';
    }
    return os.str();
}

TrainOutcome run_train(ExperimentConfig config, bool write_outputs) {
    config.finalize();
    auto [train, test] = prepare_data(config);
    warn_if_large(config);
    TrainOutcome outcome;
    outcome.trainable_parameters = count_params(config.model, config.dims);
    outcome.fit = fit(config.model, config.dims, train, test, config.training);
    outcome.summary = summarize(outcome.fit.records);
    if (write_outputs) {
        write_text(config.out / "metrics.csv", metrics_csv(outcome.fit.records, config));
        json failures = json::array();
        for (const auto& run : outcome.fit.runs) {
            if (run.diverged) {
                failures.push_back({{"seed", run.seed}, {"message", run.failure}});
            }
            save_checkpoint(config.out / "checkpoints" / ("seed_" + std::to_string(run.seed) + ".json"),
                            run.model, run.seed, header_json(config).dump());
        }
        json s = {{"header", header_json(config)},
                  {"config", json::parse(config_to_json(config))},
                  {"trainable_parameters", outcome.trainable_parameters},
                  {"epochs", summary_rows_json(outcome.summary)},
                  {"final", final_json(outcome.summary)},
                  {"failures", failures}};
        write_text(config.out / "summary.json", s.dump(2) + "\n");
    }
    return outcome;
}

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "qubits") return SweepAxis::Qubits;
    if (name == "depth") return SweepAxis::Depth;
    if (name == "noise") return SweepAxis::Noise;
    throw ValueError("unknown sweep axis '" + name + "' (expected qubits, depth or noise)");
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, SweepAxis axis,
                                  const std::vector<double>& values, bool write_outputs) {
    if (values.empty()) {
        throw ValueError("sweep needs at least one value");
    }
    const std::string axis_name =
        axis == SweepAxis::Qubits ? "qubits" : axis == SweepAxis::Depth ? "depth" : "noise";
    std::vector<SweepPoint> points;
    std::ostringstream merged;
    ExperimentConfig header_cfg = config;
    header_cfg.finalize();
    for (const auto& h : header_lines(header_cfg)) {
        merged << "# " << h << '\n';
    }
    merged << "# sweep " << axis_name << '\n';
    merged << "axis,value,epoch,split,seed,loss,accuracy,wall_time_ms\n";
    json summary = json::array();
    std::vector<ExperimentConfig> configs;
    for (double v : values) {
        ExperimentConfig c = config;
        if (axis == SweepAxis::Noise) {
            c.training.noise = {v, v};
        } else {
            if (!(v >= 1.0) || v != std::floor(v)) {
                throw ValueError(axis_name + " values must be positive integers");
            }
            (axis == SweepAxis::Qubits ? c.dims.qubits : c.dims.depth) = static_cast<std::size_t>(v);
        }
        c.out = config.out / (axis_name + "_" + format_number(v));
        configs.push_back(std::move(c));
    }
    // Points run as independent jobs, each writing its own directory; the
    // merged outputs are assembled afterwards in value order.
    std::vector<std::optional<TrainOutcome>> outcomes(values.size());
    parallel_for(values.size(), [&](std::size_t i) { outcomes[i] = run_train(configs[i], write_outputs); });
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        SweepPoint p{v, std::move(*outcomes[i])};
        for (const auto& r : p.outcome.fit.records) {
            merged << axis_name << ',' << format_number(v) << ',' << r.epoch << ',' << r.split << ','
                   << r.seed << ',' << format_number(r.loss) << ',' << format_number(r.accuracy) << ','
                   << format_number(r.wall_time_ms) << '\n';
        }
        summary.push_back({{"value", v}, {"final", final_json(p.outcome.summary)}});
        points.push_back(std::move(p));
    }
    if (write_outputs) {
        write_text(config.out / "sweep.csv", merged.str());
        json s = {{"header", header_json(header_cfg)}, {"axis", axis_name}, {"points", summary}};
        write_text(config.out / "sweep_summary.json", s.dump(2) + "\n");
    }
    return points;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

// Flags shared by the experiment subcommands; unset flags keep file/default values.
struct ExperimentFlags {
    std::optional<std::string> config;
    std::optional<std::string> task, data, model, entangler, optimizer, out;
    std::optional<std::size_t> count, resolution, qubits, depth, hidden, classes, epochs,
        batch_size, seeds, shots;
    std::optional<double> noise, lr, adr, pdr, test_fraction;
    std::optional<std::uint64_t> seed, data_seed;
    bool train_w1 = false;
    bool freeze_angles = false;
    bool no_timing = false;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "JSON config file; explicit flags override its values");
        app->add_option("--task", task, "dataset: dots | dna | file");
        app->add_option("--data", data, "CSV dataset path (task 'file')");
        app->add_option("--count", count, "number of generated samples (count)");
        app->add_option("--resolution", resolution, "diagram side length (pixels)");
        app->add_option("--noise", noise, "diagram pixel noise std (intensity units)");
        app->add_option("--data-seed", data_seed, "dataset generation and split seed");
        app->add_option("--test-fraction", test_fraction, "held-out fraction (0..1)");
        app->add_option("--model", model, "vqc-mlpnet | vqc | mlp | vqc-mlpnet-v2");
        app->add_option("--qubits", qubits, "circuit qubits U (count)");
        app->add_option("--depth", depth, "circuit layers L (count)");
        app->add_option("--hidden", hidden, "hidden width M (units)");
        app->add_option("--classes", classes, "output classes J (count)");
        app->add_option("--entangler", entangler, "ring | chain | none");
        app->add_flag("--train-w1", train_w1, "also train the seed matrix W1");
        app->add_flag("--freeze-angles", freeze_angles, "keep circuit angles fixed");
        app->add_option("--lr", lr, "learning rate (per step)");
        app->add_option("--epochs", epochs, "training epochs (count)");
        app->add_option("--batch-size", batch_size, "minibatch size (samples; 0 = full batch)");
        app->add_option("--optimizer", optimizer, "adam | sgd");
        app->add_option("--seeds", seeds, "number of independent runs (count)");
        app->add_option("--seed", seed, "first run seed");
        app->add_option("--shots", shots, "measurement shots per expectation (0 = exact)");
        app->add_option("--adr", adr, "amplitude damping rate per layer per qubit (probability)");
        app->add_option("--pdr", pdr, "phase damping rate per layer per qubit (probability)");
        app->add_flag("--no-timing", no_timing, "write wall_time_ms as 0 for byte-identical reruns");
        app->add_option("--out", out, "output directory");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c;
        if (config) {
            apply_config_json(c, read_text(*config));
        }
        if (task) c.task = *task;
        if (data) { c.data_path = *data; if (!task) c.task = "file"; }
        if (count) c.count = *count;
        if (resolution) c.resolution = *resolution;
        if (noise) c.data_noise = *noise;
        if (data_seed) c.data_seed = *data_seed;
        if (test_fraction) c.test_fraction = *test_fraction;
        if (model) c.model = parse_model_kind(*model);
        if (qubits) c.dims.qubits = *qubits;
        if (depth) c.dims.depth = *depth;
        if (hidden) c.dims.hidden = *hidden;
        if (classes) c.dims.classes = *classes;
        if (entangler) c.dims.entangler = parse_entangler(*entangler);
        if (train_w1) c.dims.train_w1 = true;
        if (freeze_angles) c.training.freeze_angles = true;
        if (lr) c.training.learning_rate = *lr;
        if (epochs) c.training.epochs = *epochs;
        if (batch_size) c.training.batch_size = *batch_size;
        if (optimizer) c.training.optimizer = parse_optimizer(*optimizer);
        if (seeds) c.seed_count = *seeds;
        if (seed) c.base_seed = *seed;
        if (shots) c.shots = *shots;
        if (adr) c.training.noise.adr = *adr;
        if (pdr) c.training.noise.pdr = *pdr;
        if (no_timing) c.training.record_timing = false;
        if (out) c.out = *out;
        c.finalize();
        return c;
    }
};

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParseError("cannot parse sweep value '" + item + "'");
        }
    }
    return out;
}

int cmd_gen_data(const ExperimentFlags& f, const std::string& out) {
    ExperimentConfig c = f.resolve();
    Dataset all;
    if (c.task == "dots") {
        all = diagrams_to_dataset(gen_diagrams(c.count, c.resolution, c.data_noise, c.data_seed));
    } else if (c.task == "dna") {
        all = dna_to_dataset(gen_dna(c.count, c.motif, c.data_seed));
    } else {
        throw ValueError("gen-data supports --task dots or dna");
    }
    std::vector<std::string> header{kArtifactVersion, "config_hash " + hex(config_hash(c)),
                                    "seeds " + std::to_string(c.data_seed), "task " + c.task};
    const fs::path path = out.empty() ? fs::path(c.task + ".csv") : fs::path(out);
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    save_dataset(all, path, header);
    std::cout << "wrote " << all.size() << " samples (D = " << all.dim() << ") to " << path.string()
              << "\n";
    return 0;
}

int cmd_train(const ExperimentFlags& f, bool dry_run) {
    ExperimentConfig c = f.resolve();
    if (dry_run) {
        if (c.dims.input_dim == 0) {
            c.dims.input_dim = c.task == "dna" ? 4 * kDnaLength : c.resolution * c.resolution;
            if (c.task == "file") {
                c.dims.input_dim = load_dataset(c.data_path).dim();
            }
        }
        const AnyModel m = init_model(c.model, c.dims, c.base_seed);
        std::cout << "trainable parameters: " << trainable_count(m) << "\n";
        return 0;
    }
    ExperimentConfig probe = c;
    prepare_data(probe);
    std::cout << "trainable parameters: " << count_params(c.model, probe.dims) << "\n";
    const TrainOutcome o = run_train(c, true);
    if (const auto t = final_summary(o.summary, "test")) {
        std::cout << "final test accuracy " << t->accuracy_mean << " +- " << t->accuracy_std
                  << ", loss " << t->loss_mean << " +- " << t->loss_std << "\n";
    }
    std::size_t failures = 0;
    for (const auto& r : o.fit.runs) {
        failures += r.diverged ? 1 : 0;
    }
    std::cout << "wrote " << (c.out / "metrics.csv").string() << "\n";
    return failures == o.fit.runs.size() ? 1 : 0;
}

int cmd_sweep(const ExperimentFlags& f, const std::string& axis, const std::string& values) {
    const ExperimentConfig c = f.resolve();
    const auto points = run_sweep(c, parse_sweep_axis(axis), parse_values(values), true);
    for (const auto& p : points) {
        if (const auto t = final_summary(p.outcome.summary, "test")) {
            std::cout << axis << " = " << p.value << ": test loss " << t->loss_mean << " +- "
                      << t->loss_std << ", accuracy " << t->accuracy_mean << " +- "
                      << t->accuracy_std << "\n";
        }
    }
    std::cout << "wrote " << (c.out / "sweep.csv").string() << "\n";
    return 0;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(r, k));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json report_json(const NtkReport& r, bool matrices) {
    json j = {{"lambda_min_vm", r.lambda_min_vm},
              {"lambda_min_vqc", r.lambda_min_vqc},
              {"ratio", r.lambda_min_vm / std::max(r.lambda_min_vqc, 1e-300)},
              {"dominance_passes", r.lambda_min_vm >= r.lambda_min_vqc - 1e-10},
              {"batch_fingerprint", hex(r.batch_fingerprint)},
              {"max_asymmetry", r.max_asymmetry()},
              {"max_recomposition_error", r.max_recomposition_error()},
              {"min_eigenvalue", r.min_eigenvalue()}};
    if (matrices) {
        j["k_vm"] = matrix_json(r.k_vm);
        j["k_vqc"] = matrix_json(r.k_vqc);
        j["k_w2"] = matrix_json(r.k_w2);
        j["k_alpha"] = matrix_json(r.k_alpha);
        j["k_beta"] = matrix_json(r.k_beta);
        j["k_gamma"] = matrix_json(r.k_gamma);
    }
    return j;
}

int cmd_ntk(const ExperimentFlags& f, const std::string& checkpoint, std::size_t batch,
            std::size_t logits, bool matrices, bool compare_v2, std::size_t convergence_steps) {
    ExperimentConfig c = f.resolve();
    auto [train, test] = prepare_data(c);
    (void)test;
    if (batch == 0 || batch > train.size()) {
        throw ValueError("--ntk-batch must lie in [1, training set size]");
    }
    std::vector<std::size_t> rows(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        rows[i] = i;
    }
    const Dataset sub = train.subset(rows);
    ModelDims dims = c.dims;
    dims.classes = logits;
    AnyModel model = checkpoint.empty() ? init_model(c.model, dims, c.base_seed)
                                        : load_checkpoint(checkpoint).model;
    const NtkReport r = ntk_report(model, sub.features, c.training.noise);
    json out = {{"header", header_json(c)},
                {"model", model_kind_name(kind_of(model))},
                {"batch_size", batch},
                {"report", report_json(r, matrices)}};
    std::ostringstream eig;
    for (const auto& h : header_lines(c)) {
        eig << "# " << h << '\n';
    }
    eig << "model,group,index,eigenvalue\n";
    auto add_eigs = [&](const std::string& name, const NtkReport& rep) {
        const std::pair<const char*, const Eigen::MatrixXd*> groups[] = {
            {"vm", &rep.k_vm},       {"vqc", &rep.k_vqc},   {"w2", &rep.k_w2},
            {"alpha", &rep.k_alpha}, {"beta", &rep.k_beta}, {"gamma", &rep.k_gamma}};
        for (const auto& [g, k] : groups) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*k, Eigen::EigenvaluesOnly);
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                eig << name << ',' << g << ',' << i << ',' << format_number(es.eigenvalues()(i)) << '\n';
            }
        }
    };
    add_eigs(model_kind_name(kind_of(model)), r);
    std::cout << "lambda_min(K_vm) = " << r.lambda_min_vm << ", lambda_min(K_vqc) = " << r.lambda_min_vqc
              << "\n";
    if (compare_v2 && kind_of(model) == ModelKind::Hybrid) {
        const AnyModel v2 = init_model(ModelKind::HybridV2, dims, c.base_seed);
        const NtkReport r2 = ntk_report(v2, sub.features, c.training.noise);
        out["v2"] = report_json(r2, matrices);
        add_eigs("vqc-mlpnet-v2", r2);
        std::cout << "v2: lambda_min(K_vm) = " << r2.lambda_min_vm << "\n";
    }
    if (convergence_steps > 0) {
        // Gradient-flow surrogate: full-batch descent with a small step.
        // The loss needs one logit per class, so a scalar-kernel model is re-initialized at J classes.
        constexpr double kFlowLr = 0.01;
        const bool reinit = checkpoint.empty() && logits != c.dims.classes;
        AnyModel m = reinit ? init_model(c.model, c.dims, c.base_seed) : model;
        const double lambda_vm =
            reinit ? ntk_report(m, sub.features, c.training.noise).lambda_min_vm : r.lambda_min_vm;
        const double c0 = initial_c0(m, sub.features, sub.labels, c.training.noise);
        std::vector<double> trace;
        for (std::size_t s = 0; s <= convergence_steps; ++s) {
            const Gradient g = backward(m, sub.features, sub.labels, c.training.noise);
            trace.push_back(g.loss);
            if (s < convergence_steps) {
                auto params = trainable_blocks(m);
                sgd_step(params, g, kFlowLr);
            }
        }
        const ConvergenceReport cr =
            convergence_bound_check(trace, lambda_vm, c0, kFlowLr, 5);
        out["convergence"] = {{"steps", convergence_steps},
                              {"learning_rate", kFlowLr},
                              {"c0", cr.c0},
                              {"lambda_min_vm", cr.lambda_min},
                              {"fitted_rate", cr.fitted_rate},
                              {"monotone_after_step_5", cr.monotone},
                              {"first_increase", cr.first_increase},
                              {"violations", cr.violations},
                              {"trace", trace}};
        std::cout << "gradient flow: fitted rate " << cr.fitted_rate << ", monotone "
                  << (cr.monotone ? "yes" : "no") << ", bound violations " << cr.violations.size()
                  << "\n";
    }
    write_text(c.out / "ntk.json", out.dump(2) + "\n");
    write_text(c.out / "ntk_eigenvalues.csv", eig.str());
    std::cout << "wrote " << (c.out / "ntk.json").string() << "\n";
    return 0;
}

int cmd_eval(const ExperimentFlags& f, const std::string& checkpoint) {
    ExperimentConfig c = f.resolve();
    auto [train, test] = prepare_data(c);
    const Checkpoint ck = load_checkpoint(checkpoint);
    json out = {{"header", header_json(c)}, {"model", model_kind_name(kind_of(ck.model))}};
    for (const Dataset* ds : {&train, &test}) {
        const Evaluation ev = evaluate(ck.model, *ds, c.training.noise, c.training.measurement);
        out[ds->split_tag] = {{"loss", ev.loss}, {"accuracy", ev.accuracy}, {"samples", ds->size()}};
    }
    std::cout << out.dump(2) << "\n";
    if (f.out) {
        write_text(c.out / "eval.json", out.dump(2) + "\n");
    }
    return 0;
}

struct BoundFlags {
    BoundConstants k;
    double hidden = 100, depth = 3, qubits = 4, samples = 4, tau = 0.05, lambda_min = 0.5, time = 4;
    bool refined = false;
};

int cmd_bounds(const BoundFlags& b) {
    const BoundConstants& k = b.k;
    k.validate();
    json out = {
        {"approximation_bound", approximation_bound(k, b.hidden, b.depth, b.qubits)},
        {"depth_for_tolerance", depth_for_tolerance(k.c2, k.alpha, b.tau)},
        {"uniform_deviation_bound", uniform_deviation_bound(k, b.depth, b.samples, b.refined)},
        {"optimization_bound", optimization_bound(k.c0, b.lambda_min, b.time)},
        {"inputs",
         {{"C1", k.c1}, {"C2", k.c2}, {"C3", k.c3}, {"alpha", k.alpha}, {"beta", k.beta},
          {"Lambda", k.lambda}, {"Lambda_Q", k.lambda_q}, {"r", k.r}, {"C0", k.c0},
          {"hidden", b.hidden}, {"depth", b.depth}, {"qubits", b.qubits}, {"samples", b.samples},
          {"tau", b.tau}, {"lambda_min", b.lambda_min}, {"time", b.time}, {"refined", b.refined}}}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"qmlp: VQC-MLPNet experiments at desk scale"};
    app.require_subcommand(1);

    ExperimentFlags gen_flags, train_flags, sweep_flags, ntk_flags, eval_flags;

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
    gen_flags.attach(gen);

    auto* train = app.add_subcommand("train", "train one model per seed");
    train_flags.attach(train);
    bool dry_run = false;
    train->add_flag("--dry-run", dry_run, "print the trainable-parameter count and exit");

    auto* sweep = app.add_subcommand("sweep", "one training run per value of an axis");
    sweep_flags.attach(sweep);
    std::string axis = "depth";
    std::string values;
    sweep->add_option("--axis", axis, "qubits | depth | noise (noise sets adr = pdr)");
    sweep->add_option("--values", values, "comma-separated axis values")->required();

    auto* ntk = app.add_subcommand("ntk", "empirical NTK report");
    ntk_flags.attach(ntk);
    std::string ntk_checkpoint;
    std::size_t ntk_batch = 16;
    std::size_t ntk_logits = 1;
    bool ntk_matrices = false;
    bool ntk_compare = false;
    std::size_t ntk_steps = 0;
    ntk->add_option("--checkpoint", ntk_checkpoint, "model checkpoint (default: fresh initialization)");
    ntk->add_option("--ntk-batch", ntk_batch, "kernel batch size (samples)");
    ntk->add_option("--logits", ntk_logits, "output logits for fresh models (count; 1 = scalar kernel)");
    ntk->add_flag("--matrices", ntk_matrices, "include kernel matrices in the JSON");
    ntk->add_flag("--compare-v2", ntk_compare, "also report the two-circuit variant");
    ntk->add_option("--convergence-steps", ntk_steps,
                    "full-batch descent steps for the convergence check (count; 0 = skip)");

    auto* bounds = app.add_subcommand("bounds", "evaluate the closed-form bounds");
    BoundFlags bf;
    bounds->add_option("--c1", bf.k.c1, "C1 (loss units)");
    bounds->add_option("--c2", bf.k.c2, "C2 (loss units)");
    bounds->add_option("--c3", bf.k.c3, "C3 (loss units)");
    bounds->add_option("--alpha", bf.k.alpha, "depth decay rate alpha (per layer)");
    bounds->add_option("--beta", bf.k.beta, "qubit decay exponent beta in (0, 1/2] (per qubit)");
    bounds->add_option("--Lambda", bf.k.lambda, "output-layer norm bound (dimensionless)");
    bounds->add_option("--Lambda-q", bf.k.lambda_q, "circuit norm bound (dimensionless)");
    bounds->add_option("--r", bf.k.r, "input radius (feature units)");
    bounds->add_option("--c0", bf.k.c0, "optimization constant C0 (loss units)");
    bounds->add_option("--hidden", bf.hidden, "hidden width M (units)");
    bounds->add_option("--depth", bf.depth, "circuit depth L (layers)");
    bounds->add_option("--qubits", bf.qubits, "qubits U (count)");
    bounds->add_option("--samples", bf.samples, "training-set size |S| (samples)");
    bounds->add_option("--tau", bf.tau, "target tolerance (loss units)");
    bounds->add_option("--lambda-min", bf.lambda_min, "smallest NTK eigenvalue (per unit time)");
    bounds->add_option("--time", bf.time, "gradient-flow time t (lr x steps)");
    bounds->add_flag("--refined", bf.refined, "use the sqrt(L) uniform-deviation form");
    auto* fit_cmd = bounds->add_subcommand("fit-depth", "fit (C2, alpha) to loss-vs-depth data");
    std::string fit_csv;
    fit_cmd->add_option("csv", fit_csv, "sweep.csv or a 'depth,loss' CSV")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_flags.attach(eval);
    std::string eval_checkpoint;
    eval->add_option("--checkpoint", eval_checkpoint, "checkpoint JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) {
            return cmd_gen_data(gen_flags, gen_flags.out.value_or(""));
        }
        if (*train) {
            return cmd_train(train_flags, dry_run);
        }
        if (*sweep) {
            return cmd_sweep(sweep_flags, axis, values);
        }
        if (*ntk) {
            return cmd_ntk(ntk_flags, ntk_checkpoint, ntk_batch, ntk_logits, ntk_matrices, ntk_compare,
                           ntk_steps);
        }
        if (*bounds) {
            if (*fit_cmd) {
                const DepthFit fit = fit_depth_csv(fit_csv);
                std::cout << json{{"C2", fit.c2}, {"alpha", fit.alpha}, {"r_squared", fit.r_squared},
                                  {"points", fit.points}}.dump(2)
                          << "\n";
                return 0;
            }
            return cmd_bounds(bf);
        }
        if (*eval) {
            return cmd_eval(eval_flags, eval_checkpoint);
        }
    } catch (const std::exception& e) {
        std::cerr << "qmlp: error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace qmlp
