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

#include "usdefake/trainer.hpp"

#include <chrono>
#include <cmath>

#include "usdefake/error.hpp"
#include "usdefake/log.hpp"

namespace usdefake {

void TrainConfig::validate() const {
  if (epochs == 0) throw UsageError("epochs must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw UsageError("learning rate must be finite and >= 0");
}

TrainingContext::TrainingContext(const DualLayerGraph& graph, NormalizationCoefficients coefficients)
    : graph_(&graph),
      news_norm_(normalize_adjacency(graph.news())),
      user_norm_(normalize_adjacency(graph.users())),
      coefficients_(std::move(coefficients)) {}

template <typename T>
EpochSummary train_epoch(const TrainingContext& ctx, RandomWalkSampler& sampler, std::size_t subgraphs,
                         Rng& rng, ModelState<T>& state, const TrainConfig& config,
                         std::span<const std::uint8_t> train_mask, const LossObserver& observer) {
  config.validate();
  if (subgraphs == 0) throw UsageError("subgraphs per epoch must be positive");
  const bool with_users = config.variant != Variant::kDeFake;
  state.optimizer.set_lr(config.lr);

  ForwardOptions opt;
  opt.variant = config.variant;
  opt.training = true;
  opt.train_news_encoder = config.train_news_encoder;
  opt.train_user_encoder = config.train_user_encoder;

  std::vector<nn::Parameter<T>*> stepped;
  if (config.train_news_encoder)
    for (auto* p : state.model.news_parameters()) stepped.push_back(p);
  if (with_users && config.train_user_encoder)
    for (auto* p : state.model.user_parameters()) stepped.push_back(p);
  for (auto* p : state.model.classifier_parameters()) stepped.push_back(p);

  EpochSummary summary;
  summary.epoch = state.epoch + 1;
  for (std::size_t b = 0; b < subgraphs; ++b) {
    const auto start = std::chrono::steady_clock::now();
    DualLayerSubgraph sub = sampler.sample(rng);
    ForwardInputs<T> in = minibatch_inputs<T>(sub, ctx.news_norm(), ctx.user_norm(), ctx.coefficients(),
                                              train_mask, with_users);
    summary.missing_alpha += in.missing_alpha;
    if (in.labeled_rows.empty()) {
      log::warn("epoch ", summary.epoch, " minibatch ", b, ": no labeled training news sampled, skipped");
      ++summary.skipped;
      continue;
    }
    nn::Tape<T> tape;
    ForwardResult r = forward(tape, state.model, in, opt);
    const double lt = static_cast<double>(tape.value(r.news_loss)(0, 0));
    const double lu = r.user_loss.valid() ? static_cast<double>(tape.value(r.user_loss)(0, 0)) : 0.0;
    const double total = static_cast<double>(tape.value(r.total)(0, 0));
    if (!std::isfinite(total))
      throw NumericError("non-finite loss at epoch " + std::to_string(summary.epoch) + ", minibatch " +
                         std::to_string(b));
    tape.backward(r.total);
    state.optimizer.step(stepped);

    LossRecord rec;
    rec.epoch = summary.epoch;
    rec.minibatch = b;
    rec.news_loss = lt;
    rec.user_loss = lu;
    rec.total = total;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    state.history.push_back(rec);
    if (observer) observer(rec);

    ++summary.minibatches;
    summary.news_loss += lt;
    summary.user_loss += lu;
    summary.total += total;
  }
  if (summary.minibatches == 0)
    throw DataError("epoch " + std::to_string(summary.epoch) + ": every minibatch lacked labeled training news");
  if (summary.missing_alpha)
    log::debug("epoch ", summary.epoch, ": ", summary.missing_alpha, " arcs used alpha = 1 (no coefficient)");
  const double n = static_cast<double>(summary.minibatches);
  summary.news_loss /= n;
  summary.user_loss /= n;
  summary.total /= n;
  state.epoch = summary.epoch;
  return summary;
}

template <typename T>
std::vector<Prediction> infer(const TrainingContext& ctx, const Model<T>& model, Variant variant,
                              std::span<const NodeId> nodes) {
  const bool with_users = variant != Variant::kDeFake;
  ForwardInputs<T> in = full_graph_inputs<T>(ctx.graph(), ctx.news_norm(), ctx.user_norm(), with_users);
  ForwardOptions opt;
  opt.variant = variant;
  opt.training = false;
  Model<T> frozen = model;
  nn::Tape<T> tape;
  ForwardResult r = forward(tape, frozen, in, opt);
  nn::Matrix<T> prob = tape.value(r.logits);
  nn::softmax_rows_inplace(prob);

  std::vector<NodeId> sources;
  if (nodes.empty()) {
    sources = ctx.graph().source_news();
    nodes = sources;
  }
  std::vector<Prediction> out;
  out.reserve(nodes.size());
  for (NodeId i : nodes) {
    if (i >= prob.rows()) throw UsageError("infer: news node " + std::to_string(i) + " out of range");
    const double p = static_cast<double>(prob(i, 1));
    if (!std::isfinite(p)) throw NumericError("infer: non-finite probability for news node " + std::to_string(i));
    out.push_back({i, static_cast<std::uint8_t>(p > 0.5 ? 1 : 0), p});
  }
  return out;
}

#define USDEFAKE_INSTANTIATE(T)                                                                               \
  template EpochSummary train_epoch<T>(const TrainingContext&, RandomWalkSampler&, std::size_t, Rng&,         \
                                       ModelState<T>&, const TrainConfig&, std::span<const std::uint8_t>,     \
                                       const LossObserver&);                                                  \
  template std::vector<Prediction> infer<T>(const TrainingContext&, const Model<T>&, Variant,                 \
                                            std::span<const NodeId>);

USDEFAKE_INSTANTIATE(float)
USDEFAKE_INSTANTIATE(double)
#undef USDEFAKE_INSTANTIATE

}  // namespace usdefake
