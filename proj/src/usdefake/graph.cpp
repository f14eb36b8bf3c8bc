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

#include "usdefake/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "usdefake/error.hpp"

namespace usdefake {

Adjacency Adjacency::from_edges(std::size_t node_count, std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::size_t> degree(node_count + 1, 0);
  for (const auto& [u, v] : edges) {
    if (u >= node_count || v >= node_count)
      throw DataError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") references a node outside [0, " + std::to_string(node_count) + ")");
    if (u == v) continue;
    ++degree[u + 1];
    ++degree[v + 1];
  }
  std::partial_sum(degree.begin(), degree.end(), degree.begin());
  std::vector<NodeId> scratch(degree.back());
  std::vector<std::size_t> fill(degree.begin(), degree.end() - 1);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    scratch[fill[u]++] = v;
    scratch[fill[v]++] = u;
  }
  Adjacency a;
  a.indptr_.assign(node_count + 1, 0);
  a.indices_.reserve(scratch.size());
  for (std::size_t i = 0; i < node_count; ++i) {
    auto first = scratch.begin() + static_cast<std::ptrdiff_t>(degree[i]);
    auto last = scratch.begin() + static_cast<std::ptrdiff_t>(degree[i + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    a.indices_.insert(a.indices_.end(), first, last);
    a.indptr_[i + 1] = a.indices_.size();
  }
  return a;
}

Adjacency Adjacency::from_csr(std::vector<std::size_t> indptr, std::vector<NodeId> indices) {
  if (indptr.empty() || indptr.front() != 0 || indptr.back() != indices.size())
    throw DataError("adjacency: malformed CSR row pointer");
  const std::size_t n = indptr.size() - 1;
  Adjacency a;
  a.indptr_ = std::move(indptr);
  a.indices_ = std::move(indices);
  for (std::size_t i = 0; i < n; ++i) {
    if (a.indptr_[i] > a.indptr_[i + 1]) throw DataError("adjacency: decreasing row pointer");
    auto nb = a.neighbors(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] >= n || nb[k] == i || (k && nb[k - 1] >= nb[k]))
        throw DataError("adjacency: row " + std::to_string(i) + " is not a sorted loop-free set");
      if (!a.find_arc(nb[k], static_cast<NodeId>(i)))
        throw DataError("adjacency: arc (" + std::to_string(i) + ", " + std::to_string(nb[k]) +
                        ") has no reverse");
    }
  }
  return a;
}

std::optional<ArcIndex> Adjacency::find_arc(NodeId u, NodeId v) const noexcept {
  if (u >= node_count()) return std::nullopt;
  auto nb = neighbors(u);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return std::nullopt;
  return indptr_[u] + static_cast<ArcIndex>(it - nb.begin());
}

std::vector<std::pair<NodeId, NodeId>> Adjacency::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

void AttributedLayer::validate() const {
  const std::size_t n = node_count();
  if (attributes.rows() != n)
    throw DimensionError("layer has " + std::to_string(n) + " nodes but " +
                         std::to_string(attributes.rows()) + " attribute rows");
  if (!labels.empty() && labels.size() != n)
    throw DimensionError("layer label vector has " + std::to_string(labels.size()) + " entries for " +
                         std::to_string(n) + " nodes");
  for (auto l : labels)
    if (l != 0 && l != 1 && l != kNoLabel) throw DataError("labels must be 0, 1 or unlabeled");
  if (!roles.empty() && roles.size() != n)
    throw DimensionError("layer role vector has " + std::to_string(roles.size()) + " entries for " +
                         std::to_string(n) + " nodes");
}

AttributedLayer build_layer(std::span<const std::pair<NodeId, NodeId>> edges, nn::Matrix<float> attributes,
                            std::vector<std::int8_t> labels, std::vector<NodeRole> roles) {
  AttributedLayer layer;
  layer.adjacency = Adjacency::from_edges(attributes.rows(), edges);
  layer.attributes = std::move(attributes);
  layer.labels = std::move(labels);
  layer.roles = std::move(roles);
  layer.validate();
  return layer;
}

DualLayerGraph::DualLayerGraph(AttributedLayer news, AttributedLayer users, std::vector<InterEdge> inter_edges)
    : news_(std::move(news)), users_(std::move(users)), inter_edges_(std::move(inter_edges)) {
  news_.validate();
  users_.validate();
  for (const auto& e : inter_edges_) {
    if (e.user >= users_.node_count() || e.news >= news_.node_count())
      throw DataError("posting edge (user " + std::to_string(e.user) + ", news " + std::to_string(e.news) +
                      ") references a missing node");
  }
  std::sort(inter_edges_.begin(), inter_edges_.end(), [](const InterEdge& a, const InterEdge& b) {
    return a.news != b.news ? a.news < b.news : a.user < b.user;
  });
  inter_edges_.erase(std::unique(inter_edges_.begin(), inter_edges_.end()), inter_edges_.end());
  poster_ptr_.assign(news_.node_count() + 1, 0);
  for (const auto& e : inter_edges_) ++poster_ptr_[e.news + 1];
  std::partial_sum(poster_ptr_.begin(), poster_ptr_.end(), poster_ptr_.begin());
  posters_.reserve(inter_edges_.size());
  for (const auto& e : inter_edges_) posters_.push_back(e.user);
}

std::vector<NodeId> DualLayerGraph::source_news() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < news_.roles.size(); ++i)
    if (news_.roles[i] == NodeRole::kSourceNews) out.push_back(i);
  return out;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  template <typename U>
  void add(U v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  template <typename U>
  void add_all(const std::vector<U>& vs) {
    add<std::uint64_t>(vs.size());
    for (const U& v : vs) add(v);
  }
};

}  // namespace

std::uint64_t structure_hash(const DualLayerGraph& graph) {
  Fnv1a f;
  for (const AttributedLayer* l : {&graph.news(), &graph.users()}) {
    std::vector<std::uint64_t> ptr(l->adjacency.indptr().begin(), l->adjacency.indptr().end());
    f.add_all(ptr);
    f.add_all(l->adjacency.indices());
  }
  f.add<std::uint64_t>(graph.inter_edges().size());
  for (const auto& e : graph.inter_edges()) {
    f.add(e.user);
    f.add(e.news);
  }
  return f.h;
}

NormalizedAdjacency normalize_adjacency(const Adjacency& adjacency) {
  const std::size_t n = adjacency.node_count();
  std::vector<double> inv_sqrt(n);
  for (NodeId i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(double(adjacency.degree(i) + 1));

  NormalizedAdjacency out;
  auto& m = out.matrix;
  m.rows = m.cols = n;
  m.indptr.assign(n + 1, 0);
  m.indices.reserve(adjacency.arc_count() + n);
  m.values.reserve(adjacency.arc_count() + n);
  out.diagonal.resize(n);
  out.arc_entry.resize(adjacency.arc_count());
  for (NodeId i = 0; i < n; ++i) {
    bool diag_done = false;
    auto push_diag = [&] {
      out.diagonal[i] = m.indices.size();
      m.indices.push_back(i);
      m.values.push_back(inv_sqrt[i] * inv_sqrt[i]);
      diag_done = true;
    };
    ArcIndex arc = adjacency.arc_begin(i);
    for (NodeId v : adjacency.neighbors(i)) {
      if (!diag_done && v > i) push_diag();
      out.arc_entry[arc++] = m.indices.size();
      m.indices.push_back(v);
      m.values.push_back(inv_sqrt[i] * inv_sqrt[v]);
    }
    if (!diag_done) push_diag();
    m.indptr[i + 1] = m.indices.size();
  }
  return out;
}

std::optional<NodeId> LayerSlice::to_local(NodeId global) const noexcept {
  auto it = std::lower_bound(to_global.begin(), to_global.end(), global);
  if (it == to_global.end() || *it != global) return std::nullopt;
  return static_cast<NodeId>(it - to_global.begin());
}

LayerSlice induced_slice(const AttributedLayer& layer, std::span<const NodeId> nodes) {
  LayerSlice s;
  s.to_global.assign(nodes.begin(), nodes.end());
  std::sort(s.to_global.begin(), s.to_global.end());
  s.to_global.erase(std::unique(s.to_global.begin(), s.to_global.end()), s.to_global.end());
  const std::size_t n = layer.node_count();
  if (!s.to_global.empty() && s.to_global.back() >= n)
    throw UsageError("induced subgraph: node " + std::to_string(s.to_global.back()) + " is out of range");

  const std::size_t m = s.to_global.size();
  std::vector<std::uint32_t> local(n, UINT32_MAX);
  for (std::size_t k = 0; k < m; ++k) local[s.to_global[k]] = static_cast<std::uint32_t>(k);

  std::vector<std::size_t> indptr(m + 1, 0);
  std::vector<NodeId> indices;
  for (std::size_t k = 0; k < m; ++k) {
    const NodeId g = s.to_global[k];
    ArcIndex arc = layer.adjacency.arc_begin(g);
    for (NodeId v : layer.adjacency.neighbors(g)) {
      if (local[v] != UINT32_MAX) {
        indices.push_back(local[v]);
        s.global_arc.push_back(arc);
      }
      ++arc;
    }
    indptr[k + 1] = indices.size();
  }
  s.layer.adjacency = Adjacency::from_csr(std::move(indptr), std::move(indices));

  s.layer.attributes = nn::Matrix<float>(m, layer.attributes.cols());
  for (std::size_t k = 0; k < m; ++k) {
    auto src = layer.attributes.row(s.to_global[k]);
    std::copy(src.begin(), src.end(), s.layer.attributes.row(k).begin());
  }
  if (layer.has_labels()) {
    s.layer.labels.resize(m);
    for (std::size_t k = 0; k < m; ++k) s.layer.labels[k] = layer.labels[s.to_global[k]];
  }
  if (!layer.roles.empty()) {
    s.layer.roles.resize(m);
    for (std::size_t k = 0; k < m; ++k) s.layer.roles[k] = layer.roles[s.to_global[k]];
  }
  return s;
}

DualLayerSubgraph induced_dual_subgraph(const DualLayerGraph& graph, std::span<const NodeId> news_nodes,
                                        std::span<const NodeId> user_nodes) {
  if (news_nodes.empty()) throw UsageError("induced subgraph: a minibatch needs at least one news node");
  DualLayerSubgraph sub;
  sub.news = induced_slice(graph.news(), news_nodes);
  sub.users = induced_slice(graph.users(), user_nodes);
  if (sub.users.size() == 0) return sub;
  std::vector<std::uint32_t> user_local(graph.users().node_count(), UINT32_MAX);
  for (std::size_t k = 0; k < sub.users.size(); ++k)
    user_local[sub.users.to_global[k]] = static_cast<std::uint32_t>(k);
  for (std::size_t k = 0; k < sub.news.size(); ++k) {
    for (NodeId u : graph.posting_users(sub.news.to_global[k]))
      if (user_local[u] != UINT32_MAX) sub.inter_edges.push_back({user_local[u], static_cast<NodeId>(k)});
  }
  return sub;
}

double closed_jaccard(const Adjacency& adjacency, NodeId u, NodeId v) {
  if (u == v) return 1.0;
  // N[u] & N[v] = (N(u) & N(v)) + [u in N(v)] + [v in N(u)]; the parts are disjoint.
  auto a = adjacency.neighbors(u);
  auto b = adjacency.neighbors(v);
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  if (adjacency.find_arc(v, u)) inter += 2;  // symmetric: u in N(v) iff v in N(u)
  const std::size_t uni = a.size() + 1 + b.size() + 1 - inter;
  return double(inter) / double(uni);
}

AttributedLayer jaccard_filter_user_edges(const AttributedLayer& layer, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw UsageError("jaccard threshold must lie in [0, 1], got " + std::to_string(threshold));
  std::vector<std::pair<NodeId, NodeId>> kept;
  for (const auto& [u, v] : layer.adjacency.edges())
    if (threshold == 0.0 || closed_jaccard(layer.adjacency, u, v) >= threshold) kept.emplace_back(u, v);
  AttributedLayer out = layer;
  out.adjacency = Adjacency::from_edges(layer.node_count(), kept);
  return out;
}

}  // namespace usdefake
