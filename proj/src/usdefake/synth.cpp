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

#include "usdefake/synth.hpp"

#include <cmath>
#include <random>

#include "usdefake/dataset.hpp"
#include "usdefake/error.hpp"
#include "usdefake/sampler.hpp"

namespace usdefake {

void SynthConfig::validate() const {
  if (n_source_news == 0 || n_users == 0 || attr_dim_news == 0 || attr_dim_user == 0)
    throw UsageError("synthetic config: counts and dimensions must be positive");
  if (n_fake_source_news > n_source_news)
    throw UsageError("synthetic config: more fake source news than source news");
  if (n_credible_users > n_users)
    throw UsageError("synthetic config: more credible users (" + std::to_string(n_credible_users) + ") than users (" +
                     std::to_string(n_users) + ")");
  if (n_credible_users == 0 || n_credible_users == n_users)
    throw UsageError("synthetic config: both user communities must be non-empty");
  if (!(mean_cascade_fanout >= 1.0)) throw UsageError("synthetic config: mean_cascade_fanout must be >= 1");
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError(std::string("synthetic config: ") + name + " must lie in [0, 1]");
  };
  unit(news_signal_strength, "news_signal_strength");
  unit(user_signal_strength, "user_signal_strength");
  unit(intra_community_prob, "intra_community_prob");
  unit(inter_community_prob, "inter_community_prob");
  if (!(posting_fidelity >= 0.5 && posting_fidelity <= 1.0))
    throw UsageError("synthetic config: posting_fidelity must lie in [0.5, 1]");
  if (intra_community_prob <= inter_community_prob)
    throw UsageError("synthetic config: intra_community_prob must exceed inter_community_prob");
  if (!(news_mean_scale >= 0.0) || !(user_mean_scale >= 0.0))
    throw UsageError("synthetic config: mean scales must be >= 0");
}

nlohmann::json to_json(const SynthConfig& c) {
  return {{"n_source_news", c.n_source_news},
          {"n_fake_source_news", c.n_fake_source_news},
          {"cascade_depth", c.cascade_depth},
          {"mean_cascade_fanout", c.mean_cascade_fanout},
          {"n_users", c.n_users},
          {"n_credible_users", c.n_credible_users},
          {"attr_dim_news", c.attr_dim_news},
          {"attr_dim_user", c.attr_dim_user},
          {"news_signal_strength", c.news_signal_strength},
          {"user_signal_strength", c.user_signal_strength},
          {"posting_fidelity", c.posting_fidelity},
          {"news_mean_scale", c.news_mean_scale},
          {"user_mean_scale", c.user_mean_scale},
          {"intra_community_prob", c.intra_community_prob},
          {"inter_community_prob", c.inter_community_prob},
          {"seed", c.seed}};
}

void merge_json(SynthConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("synthetic config must be a JSON object");
  nlohmann::json merged = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!merged.contains(key)) throw UsageError("unknown synthetic config key '" + key + "'");
    merged[key] = value;
  }
  try {
    c.n_source_news = merged["n_source_news"].get<std::size_t>();
    c.n_fake_source_news = merged["n_fake_source_news"].get<std::size_t>();
    c.cascade_depth = merged["cascade_depth"].get<std::size_t>();
    c.mean_cascade_fanout = merged["mean_cascade_fanout"].get<double>();
    c.n_users = merged["n_users"].get<std::size_t>();
    c.n_credible_users = merged["n_credible_users"].get<std::size_t>();
    c.attr_dim_news = merged["attr_dim_news"].get<std::size_t>();
    c.attr_dim_user = merged["attr_dim_user"].get<std::size_t>();
    c.news_signal_strength = merged["news_signal_strength"].get<double>();
    c.user_signal_strength = merged["user_signal_strength"].get<double>();
    c.posting_fidelity = merged["posting_fidelity"].get<double>();
    c.news_mean_scale = merged["news_mean_scale"].get<double>();
    c.user_mean_scale = merged["user_mean_scale"].get<double>();
    c.intra_community_prob = merged["intra_community_prob"].get<double>();
    c.inter_community_prob = merged["inter_community_prob"].get<double>();
    c.seed = merged["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("synthetic config: ") + e.what());
  }
}

namespace {

// +/- scale * u for a random unit direction u.
std::vector<double> class_direction(std::size_t dim, double scale, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> u(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : u) {
      x = g(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : u) x *= scale / norm;
  return u;
}

// sigma * (+/-)mu + (1 - sigma) * noise, sign + for class 1.
nn::Matrix<float> planted_attributes(const std::vector<int>& cls, const std::vector<double>& mu, double sigma,
                                     Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  nn::Matrix<float> x(cls.size(), mu.size());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const double sign = cls[i] ? 1.0 : -1.0;
    for (std::size_t c = 0; c < mu.size(); ++c)
      x(i, c) = static_cast<float>(sigma * sign * mu[c] + (1.0 - sigma) * g(rng));
  }
  return x;
}

}  // namespace

DualLayerGraph generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng structure(mix_seed(config.seed, 1));
  Rng features(mix_seed(config.seed, 2));
  Rng social(mix_seed(config.seed, 3));

  // Which sources are fake: a uniformly random subset of the configured size.
  std::vector<int> source_label(config.n_source_news, 0);
  for (std::size_t i = 0; i < config.n_fake_source_news; ++i) source_label[i] = 1;
  std::shuffle(source_label.begin(), source_label.end(), structure);

  std::vector<std::pair<NodeId, NodeId>> news_edges;
  std::vector<int> news_class;
  std::vector<std::int8_t> labels;
  std::vector<NodeRole> roles;
  std::vector<NodeId> level, next;
  std::poisson_distribution<long> first_level(config.mean_cascade_fanout - 1.0);
  for (std::size_t s = 0; s < config.n_source_news; ++s) {
    const NodeId root = static_cast<NodeId>(news_class.size());
    const int y = source_label[s];
    news_class.push_back(y);
    labels.push_back(static_cast<std::int8_t>(y));
    roles.push_back(NodeRole::kSourceNews);
    level.assign(1, root);
    for (std::size_t d = 1; d <= config.cascade_depth && !level.empty(); ++d) {
      std::size_t count = 0;
      if (d == 1) {
        count = 1 + static_cast<std::size_t>(first_level(structure));
      } else {
        std::poisson_distribution<long> p(static_cast<double>(level.size()));
        count = static_cast<std::size_t>(p(structure));
      }
      std::uniform_int_distribution<std::size_t> parent(0, level.size() - 1);
      next.clear();
      for (std::size_t k = 0; k < count; ++k) {
        const NodeId id = static_cast<NodeId>(news_class.size());
        news_edges.emplace_back(level[parent(structure)], id);
        news_class.push_back(y);
        labels.push_back(static_cast<std::int8_t>(y));
        roles.push_back(NodeRole::kCascadePost);
        next.push_back(id);
      }
      level.swap(next);
    }
  }

  // User communities: 0 = credible (ids first), 1 = non-credible.
  const std::size_t nu = config.n_users, nc = config.n_credible_users;
  std::vector<int> community(nu);
  for (std::size_t j = 0; j < nu; ++j) community[j] = j < nc ? 0 : 1;
  std::vector<std::pair<NodeId, NodeId>> user_edges;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (NodeId a = 0; a < nu; ++a)
    for (NodeId b = a + 1; b < nu; ++b) {
      const double p = community[a] == community[b] ? config.intra_community_prob : config.inter_community_prob;
      if (unit(social) < p) user_edges.emplace_back(a, b);
    }

  // Each cascade post gets one poster from the community matching its class
  // with probability rho (fake -> non-credible, real -> credible).
  std::uniform_int_distribution<NodeId> credible(0, static_cast<NodeId>(nc - 1));
  std::uniform_int_distribution<NodeId> doubtful(static_cast<NodeId>(nc), static_cast<NodeId>(nu - 1));
  std::vector<InterEdge> inter;
  for (NodeId i = 0; i < news_class.size(); ++i) {
    if (roles[i] != NodeRole::kCascadePost) continue;
    const bool match = unit(social) < config.posting_fidelity;
    const bool pick_doubtful = (news_class[i] == 1) == match;
    inter.push_back({pick_doubtful ? doubtful(social) : credible(social), i});
  }

  const auto news_mu = class_direction(config.attr_dim_news, config.news_mean_scale, features);
  const auto user_mu = class_direction(config.attr_dim_user, config.user_mean_scale, features);
  auto news_x = planted_attributes(news_class, news_mu, config.news_signal_strength, features);
  auto user_x = planted_attributes(community, user_mu, config.user_signal_strength, features);

  std::vector<NodeRole> user_roles(nu, NodeRole::kUser);
  return DualLayerGraph(build_layer(news_edges, std::move(news_x), std::move(labels), std::move(roles)),
                        build_layer(user_edges, std::move(user_x), {}, std::move(user_roles)), std::move(inter));
}

DualLayerGraph write_synthetic_bundle(const std::filesystem::path& dir, const SynthConfig& config) {
  DualLayerGraph graph = generate_synthetic(config);
  nlohmann::json manifest = {{"format_version", kDatasetFormatVersion},
                             {"generator", "usdefake-synth"},
                             {"seed", config.seed},
                             {"config", to_json(config)}};
  save_dataset(dir, graph, manifest);
  return graph;
}

}  // namespace usdefake
