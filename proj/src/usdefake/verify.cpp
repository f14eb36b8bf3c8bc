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

#include "usdefake/verify.hpp"

#include <algorithm>
#include <random>

#include "usdefake/error.hpp"

namespace usdefake {

DualLayerGraph random_dual_graph(std::uint64_t seed, std::size_t news, std::size_t users, std::size_t dim,
                                 double news_edge_prob, double user_edge_prob) {
  if (news == 0 || users == 0 || dim == 0) throw UsageError("random dual graph: sizes must be positive");
  Rng rng(mix_seed(seed, 0x766572));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  auto edges = [&](std::size_t n, double p) {
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = a + 1; b < n; ++b)
        if (unit(rng) < p) e.emplace_back(a, b);
    return e;
  };
  auto attributes = [&](std::size_t n) {
    nn::Matrix<float> x(n, dim);
    for (float& v : x.values()) v = static_cast<float>(g(rng));
    return x;
  };
  const std::size_t sources = std::max<std::size_t>(1, news / 4);
  auto news_edges = edges(news, news_edge_prob);
  auto user_edges = edges(users, user_edge_prob);
  std::vector<std::int8_t> labels(news);
  std::vector<NodeRole> roles(news, NodeRole::kCascadePost);
  for (std::size_t i = 0; i < news; ++i) {
    labels[i] = static_cast<std::int8_t>(unit(rng) < 0.5 ? 0 : 1);
    if (i < sources) roles[i] = NodeRole::kSourceNews;
  }
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(users - 1));
  std::vector<InterEdge> inter;
  for (NodeId i = static_cast<NodeId>(sources); i < news; ++i) {
    const int posters = unit(rng) < 0.5 ? 1 : 2;
    for (int k = 0; k < posters; ++k) inter.push_back({pick(rng), i});
  }
  auto news_x = attributes(news);
  auto user_x = attributes(users);
  return DualLayerGraph(build_layer(news_edges, std::move(news_x), std::move(labels), std::move(roles)),
                        build_layer(user_edges, std::move(user_x), {}, std::vector<NodeRole>(users, NodeRole::kUser)),
                        std::move(inter));
}

ModelGradientCheck check_model_gradients(const DualLayerGraph& graph, Variant variant, std::uint64_t seed,
                                         std::size_t hidden_dim, std::size_t layers,
                                         const nn::GradCheckOptions& options) {
  SamplerConfig sc;
  sc.roots = std::max<std::size_t>(1, std::min(graph.news().node_count(), graph.users().node_count()) / 2);
  sc.depth = 1;
  sc.presample_rounds = 200;
  sc.seed = seed;
  const auto coeffs = compute_coefficients(graph, estimate_probabilities(graph, sc));
  const auto news_norm = normalize_adjacency(graph.news());
  const auto user_norm = normalize_adjacency(graph.users());

  std::vector<NodeId> all_news(graph.news().node_count()), all_users(graph.users().node_count());
  for (NodeId i = 0; i < all_news.size(); ++i) all_news[i] = i;
  for (NodeId j = 0; j < all_users.size(); ++j) all_users[j] = j;
  const auto sub = induced_dual_subgraph(graph, all_news, all_users);
  const std::vector<std::uint8_t> mask(graph.news().node_count(), 1);
  const auto in = minibatch_inputs<double>(sub, news_norm, user_norm, coeffs, mask, variant != Variant::kDeFake);

  ModelConfig mc;
  mc.news_input_dim = graph.news().attribute_dim();
  mc.user_input_dim = graph.users().attribute_dim();
  mc.hidden_dim = hidden_dim;
  mc.layers = layers;
  mc.fuse_before_final_layer = layers >= 2;
  Model<double> model(mc, seed);
  Rng rng(mix_seed(seed, 0x68656164));
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& w : model.classifier_weight.value.values()) w = g(rng);
  for (double& b : model.classifier_bias.value.values()) b = g(rng);

  ForwardOptions opt;
  opt.variant = variant;
  ModelGradientCheck out;
  auto loss = [&](bool with_backward) {
    nn::Tape<double> tape;
    ForwardResult r = forward(tape, model, in, opt);
    const double total = tape.value(r.total)(0, 0);
    if (with_backward) {
      out.news_loss = tape.value(r.news_loss)(0, 0);
      out.user_loss = r.user_loss.valid() ? tape.value(r.user_loss)(0, 0) : 0.0;
      out.total = total;
      tape.backward(r.total);
    }
    return total;
  };
  std::vector<nn::Parameter<double>*> params = model.news_parameters();
  if (variant != Variant::kDeFake)
    for (auto* p : model.user_parameters()) params.push_back(p);
  for (auto* p : model.classifier_parameters()) params.push_back(p);
  out.report = nn::gradient_check(loss, params, options);
  return out;
}

}  // namespace usdefake
