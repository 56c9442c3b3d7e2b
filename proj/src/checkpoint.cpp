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

#include "qmlp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <sodium.h>

#include "qmlp/error.hpp"

namespace qmlp {

namespace {

using json = nlohmann::json;

struct NamedArray {
    std::string name;
    Eigen::Index rows;
    Eigen::Index cols;
    double* data;
};

std::vector<NamedArray> arrays_of(AnyModel& model) {
    auto mat = [](std::string n, Eigen::MatrixXd& m) {
        return NamedArray{std::move(n), m.rows(), m.cols(), m.data()};
    };
    auto vec = [](std::string n, Eigen::VectorXd& v) {
        return NamedArray{std::move(n), v.size(), 1, v.data()};
    };
    auto angles = [](std::string n, CircuitParams& c) {
        return NamedArray{std::move(n), static_cast<Eigen::Index>(c.num_angles()), 1,
                          c.angles().data()};
    };
    if (auto* h = std::get_if<HybridModelParams>(&model)) {
        return {mat("w1", h->w1), angles("angles", h->circuit), mat("lin.weight", h->lin.weight),
                vec("lin.bias", h->lin.bias), mat("w2.weight", h->out.weight),
                vec("w2.bias", h->out.bias)};
    }
    if (auto* p = std::get_if<PlainVqcParams>(&model)) {
        return {angles("angles", p->circuit), mat("head.weight", p->head.weight),
                vec("head.bias", p->head.bias)};
    }
    if (auto* m = std::get_if<MlpParams>(&model)) {
        return {mat("l1.weight", m->l1.weight), vec("l1.bias", m->l1.bias),
                mat("l2.weight", m->l2.weight), vec("l2.bias", m->l2.bias)};
    }
    auto& v = std::get<HybridV2Params>(model);
    return {mat("w1", v.w1),           angles("angles", v.circuit1), mat("lin.weight", v.lin1.weight),
            vec("lin.bias", v.lin1.bias), mat("w2.seed", v.w2),         angles("angles2", v.circuit2),
            mat("lin2.weight", v.lin2.weight), vec("lin2.bias", v.lin2.bias),
            vec("w2.bias", v.out_bias)};
}

ModelDims dims_of(const AnyModel& model) {
    if (const auto* h = std::get_if<HybridModelParams>(&model)) {
        return h->dims();
    }
    if (const auto* v = std::get_if<HybridV2Params>(&model)) {
        return v->dims();
    }
    ModelDims d;
    if (const auto* p = std::get_if<PlainVqcParams>(&model)) {
        d.input_dim = p->input_dim;
        d.classes = p->head.out_dim();
        d.qubits = p->circuit.num_qubits();
        d.depth = p->circuit.depth();
        d.entangler = p->circuit.entangler();
        d.rotation_order = p->circuit.rotation_order();
        return d;
    }
    const auto& m = std::get<MlpParams>(model);
    d.input_dim = m.l1.in_dim();
    d.hidden = m.l1.out_dim();
    d.classes = m.l2.out_dim();
    return d;
}

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw ParseError(std::string("checkpoint is missing '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint field '") + key + "': " + e.what());
    }
}

}  // namespace

std::string base64_encode_doubles(std::span<const double> values) {
    std::vector<unsigned char> bytes;
    bytes.reserve(values.size() * 8);
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            bytes.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xff));
        }
    }
    const std::size_t len = sodium_base64_ENCODED_LEN(bytes.size(), sodium_base64_VARIANT_ORIGINAL);
    std::string out(len, '\0');
    sodium_bin2base64(out.data(), len, bytes.data(), bytes.size(), sodium_base64_VARIANT_ORIGINAL);
    out.resize(len - 1);  // drop the terminator
    return out;
}

std::vector<double> base64_decode_doubles(std::string_view text) {
    std::vector<unsigned char> bytes(text.size() / 4 * 3 + 3);
    std::size_t len = 0;
    const char* end = nullptr;
    if (sodium_base642bin(bytes.data(), bytes.size(), text.data(), text.size(), nullptr, &len, &end,
                          sodium_base64_VARIANT_ORIGINAL) != 0 ||
        end != text.data() + text.size()) {
        throw ParseError("invalid base64 payload");
    }
    if (len % 8 != 0) {
        throw ParseError("base64 payload is not a whole number of float64 values");
    }
    std::vector<double> out(len / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
            bits |= static_cast<std::uint64_t>(bytes[8 * i + b]) << (8 * b);
        }
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

std::string entangler_name(Entangler e) {
    switch (e) {
        case Entangler::Ring: return "ring";
        case Entangler::Chain: return "chain";
        case Entangler::None: return "none";
    }
    return "ring";
}

Entangler parse_entangler(std::string_view name) {
    if (name == "ring") return Entangler::Ring;
    if (name == "chain") return Entangler::Chain;
    if (name == "none") return Entangler::None;
    throw ValueError("unknown entangler '" + std::string(name) + "'");
}

std::string rotation_order_name(RotationOrder o) { return o == RotationOrder::XYZ ? "xyz" : "zyx"; }

RotationOrder parse_rotation_order(std::string_view name) {
    if (name == "xyz") return RotationOrder::XYZ;
    if (name == "zyx") return RotationOrder::ZYX;
    throw ValueError("unknown rotation order '" + std::string(name) + "'");
}

std::string checkpoint_to_json(const AnyModel& model, std::uint64_t seed,
                               std::string_view header_json) {
    const ModelDims d = dims_of(model);
    json j;
    j["format"] = "qmlp-checkpoint";
    j["version"] = 1;
    j["model"] = model_kind_name(kind_of(model));
    j["seed"] = seed;
    j["dims"] = {{"input_dim", d.input_dim},
                 {"hidden", d.hidden},
                 {"classes", d.classes},
                 {"qubits", d.qubits},
                 {"depth", d.depth},
                 {"train_w1", d.train_w1},
                 {"entangler", entangler_name(d.entangler)},
                 {"rotation_order", rotation_order_name(d.rotation_order)}};
    AnyModel copy = model;
    json arrays = json::object();
    for (const auto& a : arrays_of(copy)) {
        arrays[a.name] = {{"rows", a.rows},
                          {"cols", a.cols},
                          {"data", base64_encode_doubles({a.data, static_cast<std::size_t>(a.rows * a.cols)})}};
    }
    j["arrays"] = std::move(arrays);
    if (!header_json.empty()) {
        j["header"] = json::parse(header_json);
    }
    return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (field<std::string>(j, "format") != "qmlp-checkpoint") {
        throw ParseError("not a qmlp checkpoint");
    }
    if (field<int>(j, "version") != 1) {
        throw ParseError("unsupported checkpoint version");
    }
    const ModelKind kind = parse_model_kind(field<std::string>(j, "model"));
    const json& jd = j.at("dims");
    ModelDims d;
    d.input_dim = field<std::size_t>(jd, "input_dim");
    d.hidden = field<std::size_t>(jd, "hidden");
    d.classes = field<std::size_t>(jd, "classes");
    d.qubits = field<std::size_t>(jd, "qubits");
    d.depth = field<std::size_t>(jd, "depth");
    d.train_w1 = field<bool>(jd, "train_w1");
    d.entangler = parse_entangler(field<std::string>(jd, "entangler"));
    d.rotation_order = parse_rotation_order(field<std::string>(jd, "rotation_order"));
    Checkpoint ck{init_model(kind, d, 0), field<std::uint64_t>(j, "seed")};
    const json& arrays = j.at("arrays");
    for (const auto& a : arrays_of(ck.model)) {
        if (!arrays.contains(a.name)) {
            throw ParseError("checkpoint is missing array '" + a.name + "'");
        }
        const json& ja = arrays.at(a.name);
        if (field<Eigen::Index>(ja, "rows") != a.rows || field<Eigen::Index>(ja, "cols") != a.cols) {
            throw ParseError("array '" + a.name + "' has the wrong shape");
        }
        const auto values = base64_decode_doubles(field<std::string>(ja, "data"));
        if (values.size() != static_cast<std::size_t>(a.rows * a.cols)) {
            throw ParseError("array '" + a.name + "' has the wrong length");
        }
        std::memcpy(a.data, values.data(), values.size() * sizeof(double));
    }
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const AnyModel& model, std::uint64_t seed,
                     std::string_view header_json) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write checkpoint '" + path.string() + "'");
    }
    out << checkpoint_to_json(model, seed, header_json);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open checkpoint '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str());
}

}  // namespace qmlp
