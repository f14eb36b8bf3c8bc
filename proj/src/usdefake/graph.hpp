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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "usdefake/nn/matrix.hpp"

namespace usdefake {

using NodeId = std::uint32_t;
using ArcIndex = std::size_t;

enum class NodeRole : std::uint8_t { kSourceNews = 0, kCascadePost = 1, kUser = 2 };

/// Label value for nodes without ground truth.
inline constexpr std::int8_t kNoLabel = -1;

/// Symmetric 0/1 adjacency in CSR form. Neighbor lists are sorted, free of
/// duplicates and never contain the row itself.
class Adjacency {
 public:
  Adjacency() : indptr_{0} {}

  /// Symmetrizes, drops self-loops and duplicates. Throws DataError on ids >= n.
  static Adjacency from_edges(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edges);

  /// Takes ownership of prebuilt CSR arrays; validates structure and symmetry.
  static Adjacency from_csr(std::vector<std::size_t> indptr, std::vector<NodeId> indices);

  std::size_t node_count() const noexcept { return indptr_.size() - 1; }
  std::size_t arc_count() const noexcept { return indices_.size(); }
  std::size_t edge_count() const noexcept { return indices_.size() / 2; }
  std::size_t degree(NodeId u) const noexcept { return indptr_[u + 1] - indptr_[u]; }

  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    return {indices_.data() + indptr_[u], degree(u)};
  }
  ArcIndex arc_begin(NodeId u) const noexcept { return indptr_[u]; }

  std::optional<ArcIndex> find_arc(NodeId u, NodeId v) const noexcept;

  /// Undirected edges with u < v, in CSR order.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  const std::vector<std::size_t>& indptr() const noexcept { return indptr_; }
  const std::vector<NodeId>& indices() const noexcept { return indices_; }

  bool operator==(const Adjacency&) const = default;

 private:
  std::vector<std::size_t> indptr_;
  std::vector<NodeId> indices_;
};

/// One layer of the dual-layer graph: structure, attributes (one row per
/// node), optional binary labels and per-node roles.
struct AttributedLayer {
  Adjacency adjacency;
  nn::Matrix<float> attributes;
  std::vector<std::int8_t> labels;  // empty, or one entry per node (kNoLabel allowed)
  std::vector<NodeRole> roles;      // empty, or one entry per node

  std::size_t node_count() const noexcept { return adjacency.node_count(); }
  std::size_t attribute_dim() const noexcept { return attributes.cols(); }
  bool has_labels() const noexcept { return !labels.empty(); }

  void validate() const;
};

/// Posting relation: `user` published news post `news`.
struct InterEdge {
  NodeId user;
  NodeId news;
  bool operator==(const InterEdge&) const = default;
};

class DualLayerGraph {
 public:
  DualLayerGraph() = default;
  /// Validates endpoints and deduplicates the posting edges.
  DualLayerGraph(AttributedLayer news, AttributedLayer users, std::vector<InterEdge> inter_edges);

  const AttributedLayer& news() const noexcept { return news_; }
  const AttributedLayer& users() const noexcept { return users_; }
  AttributedLayer& mutable_news() noexcept { return news_; }
  AttributedLayer& mutable_users() noexcept { return users_; }

  /// Sorted by (news, user).
  const std::vector<InterEdge>& inter_edges() const noexcept { return inter_edges_; }
  /// Users that posted news node `news` (sorted).
  std::span<const NodeId> posting_users(NodeId news) const noexcept {
    return {posters_.data() + poster_ptr_[news], poster_ptr_[news + 1] - poster_ptr_[news]};
  }

  /// Source-news node ids (role kSourceNews), ascending.
  std::vector<NodeId> source_news() const;

 private:
  AttributedLayer news_;
  AttributedLayer users_;
  std::vector<InterEdge> inter_edges_;
  std::vector<std::size_t> poster_ptr_{0};
  std::vector<NodeId> posters_;
};

/// FNV-1a over both layers' structure and the posting edges.
std::uint64_t structure_hash(const DualLayerGraph& graph);

AttributedLayer build_layer(std::span<const std::pair<NodeId, NodeId>> edges, nn::Matrix<float> attributes,
                            std::vector<std::int8_t> labels = {}, std::vector<NodeRole> roles = {});

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
struct NormalizedAdjacency {
  nn::CsrMatrix<double> matrix;        // pattern of A plus the diagonal, columns sorted
  std::vector<std::size_t> diagonal;   // entry index of (i, i) in `matrix`
  std::vector<std::size_t> arc_entry;  // entry index in `matrix` for every arc of A

  double self_weight(NodeId i) const noexcept { return matrix.values[diagonal[i]]; }
  double arc_weight(ArcIndex a) const noexcept { return matrix.values[arc_entry[a]]; }
};

NormalizedAdjacency normalize_adjacency(const Adjacency& adjacency);
inline NormalizedAdjacency normalize_adjacency(const AttributedLayer& layer) {
  return normalize_adjacency(layer.adjacency);
}

/// Induced slice of one layer with its local <-> global index maps.
struct LayerSlice {
  AttributedLayer layer;
  std::vector<NodeId> to_global;      // ascending; local id = position
  std::vector<ArcIndex> global_arc;   // per local arc, the arc index in the full layer

  std::size_t size() const noexcept { return to_global.size(); }
  std::optional<NodeId> to_local(NodeId global) const noexcept;
};

struct DualLayerSubgraph {
  LayerSlice news;
  LayerSlice users;
  std::vector<InterEdge> inter_edges;  // local ids, sorted by (news, user)
};

/// Induced slice of `layer` on `nodes` (deduplicated, any order).
LayerSlice induced_slice(const AttributedLayer& layer, std::span<const NodeId> nodes);

/// Throws UsageError when `news_nodes` is empty.
DualLayerSubgraph induced_dual_subgraph(const DualLayerGraph& graph, std::span<const NodeId> news_nodes,
                                        std::span<const NodeId> user_nodes);

/// Keeps edge (u, v) iff |N[u] & N[v]| / |N[u] | N[v]| >= threshold, using
/// closed neighborhoods of the input adjacency.
AttributedLayer jaccard_filter_user_edges(const AttributedLayer& layer, double threshold = 0.1);

/// Jaccard similarity of the closed neighborhoods of u and v.
double closed_jaccard(const Adjacency& adjacency, NodeId u, NodeId v);

}  // namespace usdefake
