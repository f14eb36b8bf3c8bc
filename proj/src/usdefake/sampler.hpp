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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "usdefake/graph.hpp"

namespace usdefake {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct SamplerConfig {
  std::size_t roots = 3000;             // roots per layer
  std::size_t depth = 2;                // random-walk steps per root
  std::size_t subgraphs_per_epoch = 4;  // minibatches per epoch
  std::size_t presample_rounds = 10000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // presampling workers; results do not depend on it

  void validate() const;
};

/// Random-walk node sampler over one layer. Keeps O(n) scratch so repeated
/// samples cost O(roots * depth) plus sorting the result.
class LayerWalker {
 public:
  explicit LayerWalker(const Adjacency& adjacency);

  /// Roots are drawn uniformly without replacement when roots <= n, with
  /// replacement otherwise; each root then walks `depth` uniform-neighbor
  /// steps (a walker on an isolated node stays). Writes the sorted set of
  /// roots and visited nodes to `out`.
  void sample(std::size_t roots, std::size_t depth, Rng& rng, std::vector<NodeId>& out);

  /// Membership in the most recent sample.
  bool contains(NodeId v) const noexcept { return stamp_[v] == epoch_; }

  const Adjacency& adjacency() const noexcept { return *adjacency_; }

 private:
  bool mark(NodeId v, std::vector<NodeId>& out);
  const Adjacency* adjacency_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

/// Draws dual-layer subgraphs: one independent random-walk sample per layer,
/// then the induced dual subgraph.
class RandomWalkSampler {
 public:
  RandomWalkSampler(const DualLayerGraph& graph, const SamplerConfig& config);

  DualLayerSubgraph sample(Rng& rng);

  /// Sampled node ids of the most recent sample(), per layer.
  const std::vector<NodeId>& last_news_nodes() const noexcept { return news_nodes_; }
  const std::vector<NodeId>& last_user_nodes() const noexcept { return user_nodes_; }

 private:
  const DualLayerGraph* graph_;
  SamplerConfig config_;
  LayerWalker news_walker_;
  LayerWalker user_walker_;
  std::vector<NodeId> news_nodes_;
  std::vector<NodeId> user_nodes_;
};

DualLayerSubgraph random_walk_sample(const DualLayerGraph& graph, const SamplerConfig& config, Rng& rng);

/// Inclusion probabilities of one layer, smoothed as (count + 1) / (N + 1).
struct LayerProbabilities {
  std::vector<double> node;  // p_i
  std::vector<double> arc;   // p_{v,i}, aligned with the layer's adjacency arcs (symmetric)
};

struct SamplingProbabilities {
  LayerProbabilities news;
  LayerProbabilities users;
  std::size_t rounds = 0;
};

/// Monte-Carlo estimate over `rounds` independent samples. Round k of the
/// layer tagged `stream` uses Rng(mix_seed(seed ^ stream, k)); counts are
/// merged by summation so the result is independent of `threads`.
LayerProbabilities estimate_layer_probabilities(const Adjacency& adjacency, std::size_t roots,
                                                std::size_t depth, std::size_t rounds, std::uint64_t seed,
                                                std::uint64_t stream, std::size_t threads = 1);

SamplingProbabilities estimate_probabilities(const DualLayerGraph& graph, const SamplerConfig& config);

/// alpha is stored per arc (i -> v) in row i: alpha_{v,i} = p_{v,i} / p_i.
/// lambda_i = layer_size * p_i.
struct LayerCoefficients {
  std::vector<double> alpha;
  std::vector<double> lambda;
};

struct NormalizationCoefficients {
  LayerCoefficients news;
  LayerCoefficients users;
};

LayerCoefficients compute_coefficients(const Adjacency& adjacency, const LayerProbabilities& probs,
                                       std::size_t layer_size);
NormalizationCoefficients compute_coefficients(const DualLayerGraph& graph, const SamplingProbabilities& probs);

// Probability sidecar cache keyed by (structure hash, roots, depth, rounds, seed).
void save_probabilities(const std::filesystem::path& path, const SamplingProbabilities& probs,
                        std::uint64_t graph_hash, const SamplerConfig& config);
/// Returns nullopt when the file is keyed to a different graph or config.
std::optional<SamplingProbabilities> load_probabilities(const std::filesystem::path& path,
                                                        std::uint64_t graph_hash, const SamplerConfig& config);

}  // namespace usdefake
