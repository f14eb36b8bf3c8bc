// Copyright 2026 The usdefake Authors. All Rights Reserved.
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

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "usdefake/graph.hpp"
#include "usdefake/news_prop.hpp"
#include "usdefake/nn/adam.hpp"
#include "usdefake/nn/checkpoint.hpp"
#include "usdefake/nn/tape.hpp"
#include "usdefake/sampler.hpp"

namespace usdefake {

enum class Variant { kDeFake, kUDeFake, kUsDeFake };

std::string_view variant_name(Variant v) noexcept;  // "defake", "udefake", "us-defake"
Variant parse_variant(std::string_view name);        // UsageError on unknown names

struct ModelConfig {
  std::size_t news_input_dim = 768;
  std::size_t user_input_dim = 768;
  std::size_t hidden_dim = 512;
  std::size_t layers = 2;
  // Add the posting users' mean embedding to the news embeddings entering
  // the last GCN layer (so it spreads from cascade posts to their sources);
  // when false the fusion happens after the last layer.
  bool fuse_before_final_layer = true;

  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

template <typename T>
class Model {
 public:
  Model() = default;
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }

  GcnEncoder<T> news_encoder;
  GcnEncoder<T> user_encoder;
  nn::Parameter<T> classifier_weight;  // hidden x 2, zero-initialized
  nn::Parameter<T> classifier_bias;    // 1 x 2

  std::vector<nn::Parameter<T>*> news_parameters();
  std::vector<nn::Parameter<T>*> user_parameters();
  std::vector<nn::Parameter<T>*> classifier_parameters();
  std::vector<nn::Parameter<T>*> parameters();

 private:
  ModelConfig config_;
};

/// Posting-mean operator (news x users): entry (i, j) = 1 / |U_i| for every
/// poster j of news i. Rows of news without posters are empty.
template <typename T>
nn::CsrMatrix<T> posting_mean_operator(std::size_t news_count, std::size_t user_count,
                                       std::span<const InterEdge> edges);

/// h_i += mean of z_j over the posters j of i; rows without posters unchanged.
template <typename T>
nn::Matrix<T> fuse_user_into_news(const nn::Matrix<T>& h, const nn::Matrix<T>& z, std::span<const InterEdge> edges);

template <typename T>
nn::Var fuse_user_into_news(nn::Tape<T>& tape, nn::Var h, nn::Var z,
                            const std::shared_ptr<const nn::CsrMatrix<T>>& posting_mean);

/// Row softmax of h W + b; column 1 is the fake probability.
template <typename T>
nn::Matrix<T> classify(const nn::Matrix<T>& h, const nn::Matrix<T>& w, const nn::Matrix<T>& b);

/// Everything one forward pass needs, for a sampled minibatch or the full graph.
template <typename T>
struct ForwardInputs {
  std::shared_ptr<const nn::CsrMatrix<T>> news_propagation;
  std::shared_ptr<const nn::CsrMatrix<T>> user_propagation;  // null when the variant skips users
  std::shared_ptr<const nn::CsrMatrix<T>> posting_mean;
  nn::Matrix<T> news_features;
  nn::Matrix<T> user_features;

  // Loss terms (minibatches only).
  std::vector<std::uint32_t> labeled_rows;  // local news rows in the training mask
  std::vector<std::uint8_t> labels;
  std::vector<double> news_lambda;  // per labeled row
  std::shared_ptr<const nn::Matrix<T>> user_target;
  std::vector<double> user_lambda;  // per local user

  std::size_t missing_alpha = 0;
};

/// Minibatch inputs of `sub`. `train_mask` is indexed by global news id.
template <typename T>
ForwardInputs<T> minibatch_inputs(const DualLayerSubgraph& sub, const NormalizedAdjacency& news_norm,
                                  const NormalizedAdjacency& user_norm, const NormalizationCoefficients& coeffs,
                                  std::span<const std::uint8_t> train_mask, bool with_users);

/// Full-graph inputs with alpha = 1.
template <typename T>
ForwardInputs<T> full_graph_inputs(const DualLayerGraph& graph, const NormalizedAdjacency& news_norm,
                                   const NormalizedAdjacency& user_norm, bool with_users);

struct ForwardOptions {
  Variant variant = Variant::kUsDeFake;
  bool training = true;
  bool train_news_encoder = true;
  bool train_user_encoder = true;
  bool train_classifier = true;
};

struct ForwardResult {
  nn::Var logits;
  nn::Var news_loss;  // valid when training
  nn::Var user_loss;  // valid when training a variant with users
  nn::Var total;
};

/// DeFake never runs the user encoder. UDeFake trains both losses without
/// fusion and fuses at inference. Us-DeFake fuses in both.
template <typename T>
ForwardResult forward(nn::Tape<T>& tape, Model<T>& model, const ForwardInputs<T>& in, const ForwardOptions& opt);

struct LossRecord {
  std::size_t epoch = 0;
  std::size_t minibatch = 0;
  double news_loss = 0.0;
  double user_loss = 0.0;
  double total = 0.0;
  double wall_ms = 0.0;
  bool operator==(const LossRecord&) const = default;
};

nlohmann::json to_json(const LossRecord& r);

template <typename T>
struct ModelState {
  Model<T> model;
  nn::Adam<T> optimizer;
  std::size_t epoch = 0;
  std::vector<LossRecord> history;
};

/// Parameters, Adam moments and the loss history. `meta` is stored verbatim.
template <typename T>
nn::Checkpoint state_to_checkpoint(const ModelState<T>& state, const nlohmann::json& meta = nlohmann::json::object());

template <typename T>
ModelState<T> state_from_checkpoint(const nn::Checkpoint& ckpt, nlohmann::json* meta = nullptr);

}  // namespace usdefake
