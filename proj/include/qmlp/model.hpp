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
 * VQC-MLPNet and its baselines.
 *
 * The hybrid model keeps a fixed seed matrix W1 (M x D). Each column is
 * amplitude-encoded into U qubits, run through the trainable circuit and read
 * out as U Pauli-Z expectations; a shared affine map f_lin lifts those back to
 * M values, giving column d of the generated matrix W1_hat. The classical
 * forward pass is then
 *
 *     logits = W2^T ReLU(W1_hat x) / sqrt(M) + b2.
 *
 * Affine maps store weights as (in x out) so that y = W^T x + b.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qmlp/noise.hpp"
#include "qmlp/simulator.hpp"

namespace qmlp {

struct AffineMap {
    Eigen::MatrixXd weight;  ///< in x out
    Eigen::VectorXd bias;    ///< out

    static AffineMap zeros(std::size_t in, std::size_t out);
    std::size_t in_dim() const { return static_cast<std::size_t>(weight.rows()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weight.cols()); }
    std::size_t num_params() const { return in_dim() * out_dim() + out_dim(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    /// Column-wise application to an (in x N) matrix.
    Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& x) const;
};

enum class ModelKind { Hybrid, Vqc, Mlp, HybridV2 };

/// Accepts vqc-mlpnet | vqc | mlp | vqc-mlpnet-v2 (and the short forms hybrid, v2).
ModelKind parse_model_kind(std::string_view name);
std::string model_kind_name(ModelKind kind);

struct ModelDims {
    std::size_t input_dim = 0;  ///< D
    std::size_t hidden = 0;     ///< M
    std::size_t classes = 2;    ///< J
    std::size_t qubits = 0;     ///< U
    std::size_t depth = 1;      ///< L
    bool train_w1 = false;
    Entangler entangler = Entangler::Ring;
    RotationOrder rotation_order = RotationOrder::XYZ;
};

/// Exact trainable-parameter count of a model kind.
std::size_t count_params(ModelKind kind, const ModelDims& dims);

/// Readout settings used when generating weights.
struct MeasurementSpec {
    MeasurementMode mode = MeasurementMode::Exact;
    std::size_t shots = 4096;
    std::uint64_t seed = 0;
};

/// Replaces each exact expectation (column d, row u) by a shot estimate drawn
/// from stream (d, u) of measurement.seed. No-op in exact mode.
void sample_expectations(Eigen::MatrixXd& expectations, const MeasurementSpec& measurement);

struct HybridModelParams {
    Eigen::MatrixXd w1;     ///< M x D seed matrix
    CircuitParams circuit;  ///< U qubits, L layers
    AffineMap lin;          ///< U -> M
    AffineMap out;          ///< M -> J
    bool train_w1 = false;

    ModelDims dims() const;
    void validate() const;
};

struct GeneratedWeights {
    Eigen::MatrixXd w1_hat;             ///< M x K generated matrix
    Eigen::MatrixXd expectations;       ///< U x K circuit readouts
    std::vector<StateVector> encoded;   ///< K encoded seed columns
};

struct ModelOutput {
    Eigen::VectorXd logits;
    Eigen::VectorXd probabilities;
};

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
/// Column-wise softmax of a (J x N) matrix.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

/// Encodes each column of `seed` (rows <= 2^U), runs the circuit and maps the
/// U expectations through `lin`.
GeneratedWeights generate_weights(const Eigen::MatrixXd& seed, const CircuitParams& circuit,
                                  const AffineMap& lin, const NoiseSpec& noise = {},
                                  const MeasurementSpec& measurement = {});

GeneratedWeights generate_w1_hat(const HybridModelParams& params, const NoiseSpec& noise = {},
                                 const MeasurementSpec& measurement = {});

ModelOutput forward(const HybridModelParams& params, const Eigen::MatrixXd& w1_hat,
                    const Eigen::VectorXd& x);

struct PlainVqcParams {
    std::size_t input_dim = 0;
    CircuitParams circuit;
    AffineMap head;  ///< U -> J

    void validate() const;
};

/// Input reduction used by the plain VQC when D > 2^U: contiguous blocks of
/// ceil(D / 2^U) features are summed. Identity when D <= 2^U.
Eigen::VectorXd reduce_input(const Eigen::VectorXd& x, std::size_t num_qubits);

/// reduce_input + amplitude_encode for every row of `features` (N x D).
std::vector<StateVector> encode_vqc_inputs(const Eigen::MatrixXd& features, std::size_t num_qubits);

ModelOutput plain_vqc_forward(const Eigen::VectorXd& x, const CircuitParams& circuit,
                              const AffineMap& head, const NoiseSpec& noise = {});

struct MlpParams {
    AffineMap l1;  ///< D -> M
    AffineMap l2;  ///< M -> J
};

ModelOutput mlp_forward(const Eigen::VectorXd& x, const AffineMap& l1, const AffineMap& l2);

/// Two-circuit variant: a second circuit generates W2_hat (M x J) from a fixed
/// seed matrix.
struct HybridV2Params {
    Eigen::MatrixXd w1;  ///< M x D seed
    CircuitParams circuit1;
    AffineMap lin1;      ///< U -> M
    Eigen::MatrixXd w2;  ///< M x J seed
    CircuitParams circuit2;
    AffineMap lin2;      ///< U -> M
    Eigen::VectorXd out_bias;  ///< J

    ModelDims dims() const;
    void validate() const;
};

struct GeneratedWeightsV2 {
    GeneratedWeights first;
    GeneratedWeights second;
};

GeneratedWeightsV2 generate_v2(const HybridV2Params& params, const NoiseSpec& noise = {},
                               const MeasurementSpec& measurement = {});

/// Same arithmetic as `forward`, with generated W2_hat in place of W2.
ModelOutput v2_forward(const Eigen::VectorXd& x, const HybridV2Params& params,
                       const GeneratedWeightsV2& weights);

using AnyModel = std::variant<HybridModelParams, PlainVqcParams, MlpParams, HybridV2Params>;

ModelKind kind_of(const AnyModel& model);

/// Random initialization: W1 ~ N(0,1)/sqrt(M); affine weights N(0,1)/sqrt(fan-in),
/// biases 0; angles uniform in [-pi, pi].
HybridModelParams init_hybrid(const ModelDims& dims, std::uint64_t seed);
PlainVqcParams init_plain_vqc(const ModelDims& dims, std::uint64_t seed);
MlpParams init_mlp(const ModelDims& dims, std::uint64_t seed);
HybridV2Params init_v2(const ModelDims& dims, std::uint64_t seed);
AnyModel init_model(ModelKind kind, const ModelDims& dims, std::uint64_t seed);

/// Named view of one trainable tensor, flattened column-major.
struct ParamBlock {
    std::string name;
    std::span<double> values;
};

/// Trainable blocks in a fixed order; the gradient uses the same layout.
std::vector<ParamBlock> trainable_blocks(AnyModel& model);
std::size_t trainable_count(const AnyModel& model);

/// Class probabilities (J x N) for the rows of `features` (N x D).
Eigen::MatrixXd predict(const AnyModel& model, const Eigen::MatrixXd& features,
                        const NoiseSpec& noise = {}, const MeasurementSpec& measurement = {});

}  // namespace qmlp
