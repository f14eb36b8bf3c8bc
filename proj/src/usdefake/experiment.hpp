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
#include <optional>

#include <json.hpp>

#include "usdefake/metrics.hpp"
#include "usdefake/model.hpp"
#include "usdefake/sampler.hpp"
#include "usdefake/trainer.hpp"

namespace usdefake {

struct ExperimentConfig {
  SamplerConfig sampler;
  TrainConfig train;
  ModelConfig model;  // input dims are overwritten from the dataset
  SplitSpec split;
  double jaccard_threshold = 0.1;  // user-edge pre-filter; 0 keeps every edge

  void validate() const;
  /// Sets the sampler, training and split seeds.
  void set_seed(std::uint64_t seed);
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Overrides the fields present in `j` (sections "sampler", "train",
/// "model", "split", key "jaccard_threshold"); unknown keys are a UsageError.
void merge_json(ExperimentConfig& c, const nlohmann::json& j);

/// The graph an experiment trains on: user edges Jaccard-filtered.
DualLayerGraph prepare_graph(const DualLayerGraph& graph, double jaccard_threshold);

/// Per-epoch progress of a fold.
struct EpochEvent {
  std::size_t fold = 0;
  EpochSummary summary;
  double val_accuracy = 0.0;
};
using EpochObserver = std::function<void(const EpochEvent&)>;

struct FoldRun {
  FoldResult result;
  ModelState<float> best;  // state after the selected epoch
};

/// Trains one fold on a prepared graph and selects the epoch with the best
/// validation accuracy (the earliest on ties).
FoldRun train_fold(const TrainingContext& ctx, const ExperimentConfig& config, std::size_t fold,
                   const LossObserver& loss_observer = {}, const EpochObserver& epoch_observer = {});

/// Split of the prepared graph's source news for `fold`.
Split fold_split(const DualLayerGraph& graph, const SplitSpec& spec, std::size_t fold);

/// Test metrics of a model on the given source news.
Metrics evaluate_nodes(const TrainingContext& ctx, const Model<float>& model, Variant variant,
                       std::span<const NodeId> nodes);

/// Prepares the graph, estimates the sampling probabilities once (unless
/// given, e.g. from a cache) and runs every fold.
MetricsReport run_experiment(const DualLayerGraph& graph, const ExperimentConfig& config,
                             const SamplingProbabilities* probabilities = nullptr,
                             const EpochObserver& epoch_observer = {});

/// Same on a graph already passed through prepare_graph().
MetricsReport run_prepared_experiment(const DualLayerGraph& prepared, const ExperimentConfig& config,
                                      const SamplingProbabilities* probabilities = nullptr,
                                      const EpochObserver& epoch_observer = {});

}  // namespace usdefake
