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

#include "usdefake/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <thread>

#include "usdefake/error.hpp"

namespace usdefake {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void SamplerConfig::validate() const {
  if (roots == 0) throw UsageError("sampler: roots per layer must be >= 1");
  if (subgraphs_per_epoch == 0) throw UsageError("sampler: subgraphs per epoch must be >= 1");
  if (presample_rounds == 0) throw UsageError("sampler: presample rounds must be >= 1");
}

LayerWalker::LayerWalker(const Adjacency& adjacency)
    : adjacency_(&adjacency), stamp_(adjacency.node_count(), 0) {}

bool LayerWalker::mark(NodeId v, std::vector<NodeId>& out) {
  if (stamp_[v] == epoch_) return false;
  stamp_[v] = epoch_;
  out.push_back(v);
  return true;
}

void LayerWalker::sample(std::size_t roots, std::size_t depth, Rng& rng, std::vector<NodeId>& out) {
  const std::size_t n = adjacency_->node_count();
  if (n == 0) throw UsageError("random walk sampler: layer has no nodes");
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  out.clear();
  std::vector<NodeId> chosen;
  chosen.reserve(std::min(roots, n));
  if (roots <= n) {
    // Floyd's algorithm: a uniform `roots`-subset of [0, n).
    for (std::size_t j = n - roots; j < n; ++j) {
      const auto t = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, j)(rng));
      const NodeId pick = mark(t, out) ? t : static_cast<NodeId>(j);
      if (pick != t) mark(pick, out);
      chosen.push_back(pick);
    }
  } else {
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    for (std::size_t k = 0; k < roots; ++k) {
      const auto t = static_cast<NodeId>(any(rng));
      mark(t, out);
      chosen.push_back(t);
    }
  }
  for (NodeId cur : chosen) {
    for (std::size_t s = 0; s < depth; ++s) {
      auto nb = adjacency_->neighbors(cur);
      if (nb.empty()) break;
      cur = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
      mark(cur, out);
    }
  }
  std::sort(out.begin(), out.end());
}

RandomWalkSampler::RandomWalkSampler(const DualLayerGraph& graph, const SamplerConfig& config)
    : graph_(&graph),
      config_(config),
      news_walker_(graph.news().adjacency),
      user_walker_(graph.users().adjacency) {
  config_.validate();
}

DualLayerSubgraph RandomWalkSampler::sample(Rng& rng) {
  news_walker_.sample(config_.roots, config_.depth, rng, news_nodes_);
  if (graph_->users().node_count() > 0)
    user_walker_.sample(config_.roots, config_.depth, rng, user_nodes_);
  else
    user_nodes_.clear();
  return induced_dual_subgraph(*graph_, news_nodes_, user_nodes_);
}

DualLayerSubgraph random_walk_sample(const DualLayerGraph& graph, const SamplerConfig& config, Rng& rng) {
  if (graph.news().node_count() == 0 || graph.users().node_count() == 0)
    throw UsageError("random walk sampler: both layers must be non-empty");
  RandomWalkSampler sampler(graph, config);
  return sampler.sample(rng);
}

namespace {

struct LayerCounts {
  std::vector<std::uint64_t> node;
  std::vector<std::uint64_t> arc;
};

void count_rounds(const Adjacency& adjacency, std::size_t roots, std::size_t depth, std::uint64_t seed,
                  std::size_t first, std::size_t last, LayerCounts& counts) {
  LayerWalker walker(adjacency);
  std::vector<NodeId> nodes;
  for (std::size_t round = first; round < last; ++round) {
    Rng rng(mix_seed(seed, round));
    walker.sample(roots, depth, rng, nodes);
    for (NodeId u : nodes) {
      ++counts.node[u];
      ArcIndex arc = adjacency.arc_begin(u);
      for (NodeId v : adjacency.neighbors(u)) {
        if (walker.contains(v)) ++counts.arc[arc];
        ++arc;
      }
    }
  }
}

}  // namespace

LayerProbabilities estimate_layer_probabilities(const Adjacency& adjacency, std::size_t roots,
                                                std::size_t depth, std::size_t rounds, std::uint64_t seed,
                                                std::uint64_t stream, std::size_t threads) {
  if (rounds == 0) throw UsageError("presampling needs at least one round");
  if (adjacency.node_count() == 0) throw UsageError("presampling: layer has no nodes");
  const std::uint64_t layer_seed = seed ^ (stream * 0xd1b54a32d192ed03ull);
  threads = std::clamp<std::size_t>(threads, 1, rounds);

  std::vector<LayerCounts> partial(threads);
  for (auto& p : partial) {
    p.node.assign(adjacency.node_count(), 0);
    p.arc.assign(adjacency.arc_count(), 0);
  }
  auto chunk = [&](std::size_t t) { return rounds * t / threads; };
  if (threads == 1) {
    count_rounds(adjacency, roots, depth, layer_seed, 0, rounds, partial[0]);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back(count_rounds, std::cref(adjacency), roots, depth, layer_seed, chunk(t), chunk(t + 1),
                        std::ref(partial[t]));
    for (auto& th : pool) th.join();
  }

  LayerProbabilities probs;
  const double denom = double(rounds) + 1.0;
  probs.node.assign(adjacency.node_count(), 0.0);
  probs.arc.assign(adjacency.arc_count(), 0.0);
  for (std::size_t i = 0; i < probs.node.size(); ++i) {
    std::uint64_t c = 0;
    for (const auto& p : partial) c += p.node[i];
    probs.node[i] = (double(c) + 1.0) / denom;
  }
  for (std::size_t a = 0; a < probs.arc.size(); ++a) {
    std::uint64_t c = 0;
    for (const auto& p : partial) c += p.arc[a];
    probs.arc[a] = (double(c) + 1.0) / denom;
  }
  return probs;
}

SamplingProbabilities estimate_probabilities(const DualLayerGraph& graph, const SamplerConfig& config) {
  config.validate();
  SamplingProbabilities p;
  p.rounds = config.presample_rounds;
  p.news = estimate_layer_probabilities(graph.news().adjacency, config.roots, config.depth,
                                        config.presample_rounds, config.seed, 1, config.threads);
  if (graph.users().node_count() > 0)
    p.users = estimate_layer_probabilities(graph.users().adjacency, config.roots, config.depth,
                                           config.presample_rounds, config.seed, 2, config.threads);
  return p;
}

LayerCoefficients compute_coefficients(const Adjacency& adjacency, const LayerProbabilities& probs,
                                       std::size_t layer_size) {
  if (probs.node.size() != adjacency.node_count() || probs.arc.size() != adjacency.arc_count())
    throw DimensionError("coefficients: probability table does not match the layer");
  LayerCoefficients c;
  c.lambda.resize(probs.node.size());
  c.alpha.resize(probs.arc.size());
  for (NodeId i = 0; i < adjacency.node_count(); ++i) {
    const double pi = probs.node[i];
    if (!(pi > 0.0)) throw NumericError("coefficients: node probability must be positive");
    c.lambda[i] = double(layer_size) * pi;
    for (ArcIndex a = adjacency.arc_begin(i); a < adjacency.arc_begin(i) + adjacency.degree(i); ++a)
      c.alpha[a] = probs.arc[a] / pi;
  }
  return c;
}

NormalizationCoefficients compute_coefficients(const DualLayerGraph& graph, const SamplingProbabilities& probs) {
  NormalizationCoefficients c;
  c.news = compute_coefficients(graph.news().adjacency, probs.news, graph.news().node_count());
  if (graph.users().node_count() > 0)
    c.users = compute_coefficients(graph.users().adjacency, probs.users, graph.users().node_count());
  return c;
}

namespace {

constexpr char kProbMagic[8] = {'U', 'S', 'D', 'F', 'P', 'R', 'O', 'B'};
constexpr std::uint32_t kProbVersion = 1;

template <typename U>
void put(std::string& out, U v) {
  char buf[sizeof(U)];
  std::memcpy(buf, &v, sizeof(U));
  out.append(buf, sizeof(U));
}

void put_doubles(std::string& out, const std::vector<double>& v) {
  put<std::uint64_t>(out, v.size());
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  template <typename U>
  U get() {
    if (s.size() - pos < sizeof(U)) throw DataError("probability cache: truncated file");
    U v;
    std::memcpy(&v, s.data() + pos, sizeof(U));
    pos += sizeof(U);
    return v;
  }
  std::vector<double> doubles() {
    const auto n = get<std::uint64_t>();
    if ((s.size() - pos) / sizeof(double) < n) throw DataError("probability cache: truncated file");
    std::vector<double> v(n);
    std::memcpy(v.data(), s.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return v;
  }
};

}  // namespace

static_assert(std::endian::native == std::endian::little, "cache encoding assumes little-endian");

void save_probabilities(const std::filesystem::path& path, const SamplingProbabilities& probs,
                        std::uint64_t graph_hash, const SamplerConfig& config) {
  std::string out(kProbMagic, sizeof(kProbMagic));
  put<std::uint32_t>(out, kProbVersion);
  put<std::uint64_t>(out, graph_hash);
  put<std::uint64_t>(out, config.roots);
  put<std::uint64_t>(out, config.depth);
  put<std::uint64_t>(out, config.presample_rounds);
  put<std::uint64_t>(out, config.seed);
  for (const LayerProbabilities* l : {&probs.news, &probs.users}) {
    put_doubles(out, l->node);
    put_doubles(out, l->arc);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write probability cache '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::optional<SamplingProbabilities> load_probabilities(const std::filesystem::path& path,
                                                        std::uint64_t graph_hash, const SamplerConfig& config) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read probability cache '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kProbMagic) || std::memcmp(bytes.data(), kProbMagic, sizeof(kProbMagic)) != 0)
    throw DataError("probability cache '" + path.string() + "' has bad magic bytes");
  Cursor c{bytes, sizeof(kProbMagic)};
  if (c.get<std::uint32_t>() != kProbVersion) throw DataError("probability cache: unsupported version");
  const auto hash = c.get<std::uint64_t>();
  const auto roots = c.get<std::uint64_t>();
  const auto depth = c.get<std::uint64_t>();
  const auto rounds = c.get<std::uint64_t>();
  const auto seed = c.get<std::uint64_t>();
  if (hash != graph_hash || roots != config.roots || depth != config.depth ||
      rounds != config.presample_rounds || seed != config.seed)
    return std::nullopt;
  SamplingProbabilities p;
  p.rounds = rounds;
  for (LayerProbabilities* l : {&p.news, &p.users}) {
    l->node = c.doubles();
    l->arc = c.doubles();
  }
  return p;
}

}  // namespace usdefake
