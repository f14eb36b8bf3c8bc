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

#include <functional>
#include <span>
#include <vector>

#include "usdefake/model.hpp"
#include "usdefake/sampler.hpp"

namespace usdefake {

struct TrainConfig {
  std::size_t epochs = 30;
  double lr = 0.01;
  Variant variant = Variant::kUsDeFake;
  std::uint64_t seed = 0;
  bool train_news_encoder = true;
  bool train_user_encoder = true;

  void validate() const;
};

/// Immutable training context: the graph, both normalized adjacencies and
/// the coefficients estimated once up front.
class TrainingContext {
 public:
  TrainingContext(const DualLayerGraph& graph, NormalizationCoefficients coefficients);

  const DualLayerGraph& graph() const noexcept { return *graph_; }
  const NormalizedAdjacency& news_norm() const noexcept { return news_norm_; }
  const NormalizedAdjacency& user_norm() const noexcept { return user_norm_; }
  const NormalizationCoefficients& coefficients() const noexcept { return coefficients_; }

 private:
  const DualLayerGraph* graph_;
  NormalizedAdjacency news_norm_;
  NormalizedAdjacency user_norm_;
  NormalizationCoefficients coefficients_;
};

struct EpochSummary {
  std::size_t epoch = 0;
  std::size_t minibatches = 0;  // minibatches that took an optimizer step
  std::size_t skipped = 0;      // minibatches without labeled news
  double news_loss = 0.0;       // means over the stepped minibatches
  double user_loss = 0.0;
  double total = 0.0;
  std::size_t missing_alpha = 0;
};

using LossObserver = std::function<void(const LossRecord&)>;

/// `subgraphs_per_epoch` minibatches: sample, forward, backward, Adam step.
/// `train_mask` marks (by global news id) the nodes whose labels enter the
/// loss. Throws NumericError on a non-finite loss and DataError when every
/// minibatch of the epoch was skipped.
template <typename T>
EpochSummary train_epoch(const TrainingContext& ctx, RandomWalkSampler& sampler, std::size_t subgraphs,
                         Rng& rng, ModelState<T>& state, const TrainConfig& config,
                         std::span<const std::uint8_t> train_mask, const LossObserver& observer = {});

struct Prediction {
  NodeId node = 0;
  std::uint8_t label = 0;  // 1 = fake; a 0.5 tie predicts 0
  double fake_probability = 0.5;
};

/// Full-graph forward with alpha = 1 and fusion over every posting edge.
/// Reports the requested news nodes (all source news when `nodes` is empty).
template <typename T>
std::vector<Prediction> infer(const TrainingContext& ctx, const Model<T>& model, Variant variant,
                              std::span<const NodeId> nodes = {});

}  // namespace usdefake
