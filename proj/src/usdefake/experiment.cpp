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

#include "usdefake/experiment.hpp"

#include <algorithm>

#include "usdefake/dataset.hpp"
#include "usdefake/error.hpp"
#include "usdefake/log.hpp"

namespace usdefake {

void ExperimentConfig::validate() const {
  sampler.validate();
  train.validate();
  model.validate();
  split.validate();
  if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0))
    throw UsageError("jaccard_threshold must lie in [0, 1]");
}

void ExperimentConfig::set_seed(std::uint64_t seed) {
  sampler.seed = seed;
  train.seed = seed;
  split.seed = seed;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"sampler",
           {{"roots", c.sampler.roots},
            {"depth", c.sampler.depth},
            {"subgraphs_per_epoch", c.sampler.subgraphs_per_epoch},
            {"presample_rounds", c.sampler.presample_rounds},
            {"seed", c.sampler.seed}}},
          {"train",
           {{"epochs", c.train.epochs},
            {"lr", c.train.lr},
            {"variant", std::string(variant_name(c.train.variant))},
            {"seed", c.train.seed}}},
          {"model", to_json(c.model)},
          {"split",
           {{"train", c.split.train},
            {"val", c.split.val},
            {"test", c.split.test},
            {"folds", c.split.folds},
            {"seed", c.split.seed}}},
          {"jaccard_threshold", c.jaccard_threshold}};
}

namespace {

template <typename V>
void take(const nlohmann::json& section, const char* key, V& target) {
  if (section.contains(key)) target = section.at(key).get<V>();
}

void check_keys(const nlohmann::json& j, const nlohmann::json& reference, const std::string& where) {
  if (!j.is_object()) throw UsageError("config section '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!reference.contains(key)) throw UsageError("unknown config key '" + where + key + "'");
    if (reference[key].is_object()) check_keys(value, reference[key], where + key + ".");
  }
}

}  // namespace

void merge_json(ExperimentConfig& c, const nlohmann::json& j) {
  nlohmann::json reference = to_json(c);
  reference["sampler"]["threads"] = c.sampler.threads;
  check_keys(j, reference, "");
  try {
    if (j.contains("sampler")) {
      const auto& s = j["sampler"];
      take(s, "roots", c.sampler.roots);
      take(s, "depth", c.sampler.depth);
      take(s, "subgraphs_per_epoch", c.sampler.subgraphs_per_epoch);
      take(s, "presample_rounds", c.sampler.presample_rounds);
      take(s, "seed", c.sampler.seed);
      take(s, "threads", c.sampler.threads);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      take(t, "epochs", c.train.epochs);
      take(t, "lr", c.train.lr);
      take(t, "seed", c.train.seed);
      if (t.contains("variant")) c.train.variant = parse_variant(t["variant"].get<std::string>());
    }
    if (j.contains("model")) {
      const auto& m = j["model"];
      take(m, "news_input_dim", c.model.news_input_dim);
      take(m, "user_input_dim", c.model.user_input_dim);
      take(m, "hidden_dim", c.model.hidden_dim);
      take(m, "layers", c.model.layers);
      take(m, "fuse_before_final_layer", c.model.fuse_before_final_layer);
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      take(s, "train", c.split.train);
      take(s, "val", c.split.val);
      take(s, "test", c.split.test);
      take(s, "folds", c.split.folds);
      take(s, "seed", c.split.seed);
    }
    take(j, "jaccard_threshold", c.jaccard_threshold);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

DualLayerGraph prepare_graph(const DualLayerGraph& graph, double jaccard_threshold) {
  if (jaccard_threshold <= 0.0) return graph;
  return DualLayerGraph(graph.news(), jaccard_filter_user_edges(graph.users(), jaccard_threshold),
                        graph.inter_edges());
}

Split fold_split(const DualLayerGraph& graph, const SplitSpec& spec, std::size_t fold) {
  const auto sources = graph.source_news();
  std::vector<std::int8_t> labels;
  labels.reserve(sources.size());
  for (NodeId s : sources) labels.push_back(graph.news().has_labels() ? graph.news().labels[s] : kNoLabel);
  return split_nodes(sources, labels, spec, fold);
}

namespace {

Metrics metrics_of(const std::vector<Prediction>& all, const DualLayerGraph& graph, std::span<const NodeId> nodes,
                   const std::vector<std::size_t>& row_of) {
  std::vector<std::uint8_t> pred, truth;
  pred.reserve(nodes.size());
  truth.reserve(nodes.size());
  for (NodeId n : nodes) {
    pred.push_back(all[row_of[n]].label);
    truth.push_back(static_cast<std::uint8_t>(graph.news().labels[n]));
  }
  return compute_metrics(pred, truth);
}

}  // namespace

Metrics evaluate_nodes(const TrainingContext& ctx, const Model<float>& model, Variant variant,
                       std::span<const NodeId> nodes) {
  const auto pred = infer<float>(ctx, model, variant, nodes);
  std::vector<std::uint8_t> p, t;
  for (const auto& x : pred) {
    p.push_back(x.label);
    const auto y = ctx.graph().news().has_labels() ? ctx.graph().news().labels[x.node] : kNoLabel;
    if (y == kNoLabel) throw DataError("evaluate: news node " + std::to_string(x.node) + " has no label");
    t.push_back(static_cast<std::uint8_t>(y));
  }
  return compute_metrics(p, t);
}

FoldRun train_fold(const TrainingContext& ctx, const ExperimentConfig& config, std::size_t fold,
                   const LossObserver& loss_observer, const EpochObserver& epoch_observer) {
  const DualLayerGraph& graph = ctx.graph();
  const Split split = fold_split(graph, config.split, fold);
  if (split.train.empty()) throw DataError("fold " + std::to_string(fold) + ": empty training split");

  // A cascade post trains only when its source is in the training split.
  const auto source_of = cascade_sources(graph.news());
  std::vector<std::uint8_t> in_train(graph.news().node_count(), 0);
  for (NodeId s : split.train) in_train[s] = 1;
  std::vector<std::uint8_t> mask(graph.news().node_count(), 0);
  for (NodeId i = 0; i < mask.size(); ++i) mask[i] = in_train[source_of[i]];

  ModelConfig mc = config.model;
  mc.news_input_dim = graph.news().attribute_dim();
  mc.user_input_dim = graph.users().attribute_dim();

  ModelState<float> state;
  state.model = Model<float>(mc, mix_seed(config.train.seed, 0x200 + fold));
  nn::AdamConfig ac;
  ac.lr = config.train.lr;
  state.optimizer = nn::Adam<float>(ac);

  RandomWalkSampler sampler(graph, config.sampler);
  Rng rng(mix_seed(config.sampler.seed, 0x100 + fold));

  std::vector<NodeId> eval_nodes = split.val;
  eval_nodes.insert(eval_nodes.end(), split.test.begin(), split.test.end());
  std::sort(eval_nodes.begin(), eval_nodes.end());
  std::vector<std::size_t> row_of(graph.news().node_count(), 0);
  for (std::size_t k = 0; k < eval_nodes.size(); ++k) row_of[eval_nodes[k]] = k;

  FoldRun run;
  run.result.fold = fold;
  bool have_best = false;
  for (std::size_t e = 0; e < config.train.epochs; ++e) {
    const EpochSummary summary = train_epoch<float>(ctx, sampler, config.sampler.subgraphs_per_epoch, rng, state,
                                                    config.train, mask, loss_observer);
    run.result.epoch_loss.push_back(summary.total);
    double val_acc = 0.0;
    Metrics test{};
    if (!eval_nodes.empty()) {
      const auto pred = infer<float>(ctx, state.model, config.train.variant, eval_nodes);
      if (!split.val.empty()) val_acc = metrics_of(pred, graph, split.val, row_of).accuracy;
      if (!split.test.empty()) test = metrics_of(pred, graph, split.test, row_of);
    }
    run.result.val_accuracy.push_back(val_acc);
    if (!have_best || val_acc > run.result.best_val_accuracy) {
      have_best = true;
      run.result.best_epoch = summary.epoch;
      run.result.best_val_accuracy = val_acc;
      run.result.test = test;
      run.best = state;
    }
    if (epoch_observer) epoch_observer({fold, summary, val_acc});
  }
  return run;
}

MetricsReport run_experiment(const DualLayerGraph& input, const ExperimentConfig& config,
                             const SamplingProbabilities* probabilities, const EpochObserver& epoch_observer) {
  config.validate();
  return run_prepared_experiment(prepare_graph(input, config.jaccard_threshold), config, probabilities,
                                 epoch_observer);
}

MetricsReport run_prepared_experiment(const DualLayerGraph& graph, const ExperimentConfig& config,
                                      const SamplingProbabilities* probabilities, const EpochObserver& epoch_observer) {
  config.validate();
  SamplingProbabilities estimated;
  if (!probabilities) {
    estimated = estimate_probabilities(graph, config.sampler);
    probabilities = &estimated;
  }
  const TrainingContext ctx(graph, compute_coefficients(graph, *probabilities));

  MetricsReport report;
  report.variant = std::string(variant_name(config.train.variant));
  report.config = to_json(config);
  report.config["model"]["news_input_dim"] = graph.news().attribute_dim();
  report.config["model"]["user_input_dim"] = graph.users().attribute_dim();
  report.config["dataset"] = to_json(describe(graph));
  for (std::size_t f = 0; f < config.split.folds; ++f) {
    try {
      report.folds.push_back(train_fold(ctx, config, f, {}, epoch_observer).result);
    } catch (const Error& e) {
      const std::string msg = "fold " + std::to_string(f) + ": " + e.what();
      switch (e.kind()) {
        case ErrorKind::kUsage: throw UsageError(msg);
        case ErrorKind::kData: throw DataError(msg);
        case ErrorKind::kNumeric: throw NumericError(msg);
      }
      throw;
    }
  }
  report.summarize();
  return report;
}

}  // namespace usdefake
