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

#include "usdefake/model.hpp"

#include <algorithm>

#include "usdefake/error.hpp"
#include "usdefake/nn/kernels.hpp"
#include "usdefake/user_interact.hpp"

namespace usdefake {

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::kDeFake: return "defake";
    case Variant::kUDeFake: return "udefake";
    case Variant::kUsDeFake: return "us-defake";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "defake") return Variant::kDeFake;
  if (name == "udefake") return Variant::kUDeFake;
  if (name == "us-defake" || name == "usdefake") return Variant::kUsDeFake;
  throw UsageError("unknown variant '" + std::string(name) + "' (expected defake, udefake or us-defake)");
}

void ModelConfig::validate() const {
  if (news_input_dim == 0 || user_input_dim == 0 || hidden_dim == 0)
    throw UsageError("model dimensions must be positive");
  if (layers == 0) throw UsageError("model needs at least one GCN layer");
  if (fuse_before_final_layer && layers < 2)
    throw UsageError("fusing before the final layer needs at least two GCN layers");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"news_input_dim", c.news_input_dim},
          {"user_input_dim", c.user_input_dim},
          {"hidden_dim", c.hidden_dim},
          {"layers", c.layers},
          {"fuse_before_final_layer", c.fuse_before_final_layer}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.news_input_dim = j.value("news_input_dim", c.news_input_dim);
  c.user_input_dim = j.value("user_input_dim", c.user_input_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.layers = j.value("layers", c.layers);
  c.fuse_before_final_layer = j.value("fuse_before_final_layer", c.fuse_before_final_layer);
  return c;
}

template <typename T>
Model<T>::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  const std::vector<std::size_t> dims(config_.layers, config_.hidden_dim);
  news_encoder = GcnEncoder<T>("news", config_.news_input_dim, dims, rng);
  user_encoder = GcnEncoder<T>("user", config_.user_input_dim, dims, rng);
  classifier_weight = nn::Parameter<T>("classifier.W", nn::Matrix<T>(config_.hidden_dim, 2));
  classifier_bias = nn::Parameter<T>("classifier.b", nn::Matrix<T>(1, 2));
}

template <typename T>
std::vector<nn::Parameter<T>*> Model<T>::news_parameters() {
  std::vector<nn::Parameter<T>*> out;
  for (auto& w : news_encoder.weights()) out.push_back(&w);
  return out;
}

template <typename T>
std::vector<nn::Parameter<T>*> Model<T>::user_parameters() {
  std::vector<nn::Parameter<T>*> out;
  for (auto& w : user_encoder.weights()) out.push_back(&w);
  return out;
}

template <typename T>
std::vector<nn::Parameter<T>*> Model<T>::classifier_parameters() {
  return {&classifier_weight, &classifier_bias};
}

template <typename T>
std::vector<nn::Parameter<T>*> Model<T>::parameters() {
  auto out = news_parameters();
  for (auto* p : user_parameters()) out.push_back(p);
  for (auto* p : classifier_parameters()) out.push_back(p);
  return out;
}

template <typename T>
nn::CsrMatrix<T> posting_mean_operator(std::size_t news_count, std::size_t user_count,
                                       std::span<const InterEdge> edges) {
  std::vector<InterEdge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const InterEdge& a, const InterEdge& b) { return a.news != b.news ? a.news < b.news : a.user < b.user; });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  nn::CsrMatrix<T> m;
  m.rows = news_count;
  m.cols = user_count;
  m.indptr.assign(news_count + 1, 0);
  for (const InterEdge& e : sorted) {
    if (e.news >= news_count || e.user >= user_count)
      throw DimensionError("posting edge (" + std::to_string(e.user) + ", " + std::to_string(e.news) +
                           ") outside " + std::to_string(user_count) + " users x " + std::to_string(news_count) +
                           " news");
    ++m.indptr[e.news + 1];
  }
  for (std::size_t i = 0; i < news_count; ++i) m.indptr[i + 1] += m.indptr[i];
  m.indices.reserve(sorted.size());
  m.values.reserve(sorted.size());
  for (const InterEdge& e : sorted) {
    m.indices.push_back(e.user);
    m.values.push_back(T(1) / static_cast<T>(m.indptr[e.news + 1] - m.indptr[e.news]));
  }
  return m;
}

template <typename T>
nn::Matrix<T> fuse_user_into_news(const nn::Matrix<T>& h, const nn::Matrix<T>& z, std::span<const InterEdge> edges) {
  if (h.cols() != z.cols())
    throw DimensionError("fusion: news embeddings " + nn::shape_string(h) + " vs user embeddings " +
                         nn::shape_string(z));
  nn::Matrix<T> out = h;
  nn::kernels::spmm(posting_mean_operator<T>(h.rows(), z.rows(), edges), z, out);
  return out;
}

template <typename T>
nn::Var fuse_user_into_news(nn::Tape<T>& tape, nn::Var h, nn::Var z,
                            const std::shared_ptr<const nn::CsrMatrix<T>>& posting_mean) {
  if (tape.value(h).cols() != tape.value(z).cols())
    throw DimensionError("fusion: news embeddings " + nn::shape_string(tape.value(h)) + " vs user embeddings " +
                         nn::shape_string(tape.value(z)));
  return nn::add(tape, h, nn::spmm(tape, posting_mean, z));
}

template <typename T>
nn::Matrix<T> classify(const nn::Matrix<T>& h, const nn::Matrix<T>& w, const nn::Matrix<T>& b) {
  if (w.rows() != h.cols() || w.cols() != 2 || b.rows() != 1 || b.cols() != 2)
    throw DimensionError("classifier: embeddings " + nn::shape_string(h) + ", W " + nn::shape_string(w) + ", b " +
                         nn::shape_string(b));
  nn::Matrix<T> logits(h.rows(), 2);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    logits(i, 0) = b(0, 0);
    logits(i, 1) = b(0, 1);
  }
  nn::kernels::gemm_nn(h, w, logits);
  nn::softmax_rows_inplace(logits);
  return logits;
}

template <typename T>
ForwardInputs<T> minibatch_inputs(const DualLayerSubgraph& sub, const NormalizedAdjacency& news_norm,
                                  const NormalizedAdjacency& user_norm, const NormalizationCoefficients& coeffs,
                                  std::span<const std::uint8_t> train_mask, bool with_users) {
  ForwardInputs<T> in;
  in.news_propagation = std::make_shared<const nn::CsrMatrix<T>>(
      build_propagation<T>(sub.news, news_norm, &coeffs.news, &in.missing_alpha));
  in.news_features = sub.news.layer.attributes.template cast<T>();
  const auto& labels = sub.news.layer.labels;
  for (NodeId i = 0; i < sub.news.size(); ++i) {
    const NodeId g = sub.news.to_global[i];
    if (g >= train_mask.size() || !train_mask[g] || labels.empty() || labels[i] == kNoLabel) continue;
    in.labeled_rows.push_back(i);
    in.labels.push_back(static_cast<std::uint8_t>(labels[i]));
    in.news_lambda.push_back(g < coeffs.news.lambda.size() ? coeffs.news.lambda[g] : 1.0);
  }
  if (with_users) {
    in.user_propagation = std::make_shared<const nn::CsrMatrix<T>>(
        build_propagation<T>(sub.users, user_norm, &coeffs.users, &in.missing_alpha));
    in.user_features = sub.users.layer.attributes.template cast<T>();
    in.posting_mean = std::make_shared<const nn::CsrMatrix<T>>(
        posting_mean_operator<T>(sub.news.size(), sub.users.size(), sub.inter_edges));
    in.user_target = std::make_shared<const nn::Matrix<T>>(dense_adjacency<T>(sub.users.layer.adjacency));
    in.user_lambda.resize(sub.users.size());
    for (NodeId j = 0; j < sub.users.size(); ++j) {
      const NodeId g = sub.users.to_global[j];
      in.user_lambda[j] = g < coeffs.users.lambda.size() ? coeffs.users.lambda[g] : 1.0;
    }
  }
  return in;
}

template <typename T>
ForwardInputs<T> full_graph_inputs(const DualLayerGraph& graph, const NormalizedAdjacency& news_norm,
                                   const NormalizedAdjacency& user_norm, bool with_users) {
  ForwardInputs<T> in;
  in.news_propagation = std::make_shared<const nn::CsrMatrix<T>>(full_propagation<T>(news_norm));
  in.news_features = graph.news().attributes.template cast<T>();
  if (with_users) {
    in.user_propagation = std::make_shared<const nn::CsrMatrix<T>>(full_propagation<T>(user_norm));
    in.user_features = graph.users().attributes.template cast<T>();
    in.posting_mean = std::make_shared<const nn::CsrMatrix<T>>(
        posting_mean_operator<T>(graph.news().node_count(), graph.users().node_count(), graph.inter_edges()));
  }
  return in;
}

template <typename T>
ForwardResult forward(nn::Tape<T>& tape, Model<T>& model, const ForwardInputs<T>& in, const ForwardOptions& opt) {
  const bool with_users = opt.variant != Variant::kDeFake;
  const bool fuse = opt.variant == Variant::kUsDeFake || (opt.variant == Variant::kUDeFake && !opt.training);
  const std::size_t layers = model.news_encoder.layer_count();
  const bool early = model.config().fuse_before_final_layer;

  auto news_w = model.news_encoder.bind(tape, opt.training && opt.train_news_encoder);
  nn::Var h = tape.constant(in.news_features);

  nn::Var z;
  std::vector<nn::Var> user_w;
  if (with_users) {
    if (!in.user_propagation || !in.posting_mean)
      throw UsageError("forward: user-layer inputs missing for variant " + std::string(variant_name(opt.variant)));
    user_w = model.user_encoder.bind(tape, opt.training && opt.train_user_encoder);
    z = model.user_encoder.apply(tape, in.user_propagation, tape.constant(in.user_features), user_w, 0,
                                 model.user_encoder.layer_count());
  }

  if (fuse && early) {
    h = model.news_encoder.apply(tape, in.news_propagation, h, news_w, 0, layers - 1);
    h = fuse_user_into_news(tape, h, z, in.posting_mean);
    h = model.news_encoder.apply(tape, in.news_propagation, h, news_w, layers - 1, layers);
  } else {
    h = model.news_encoder.apply(tape, in.news_propagation, h, news_w, 0, layers);
    if (fuse) h = fuse_user_into_news(tape, h, z, in.posting_mean);
  }

  const bool head_trainable = opt.training && opt.train_classifier;
  nn::Var wf = head_trainable ? tape.parameter(model.classifier_weight) : tape.constant(model.classifier_weight.value);
  nn::Var bf = head_trainable ? tape.parameter(model.classifier_bias) : tape.constant(model.classifier_bias.value);

  ForwardResult r;
  r.logits = nn::add_row_bias(tape, nn::matmul(tape, h, wf), bf);
  if (!opt.training) return r;

  std::vector<T> weights(in.news_lambda.size());
  for (std::size_t k = 0; k < weights.size(); ++k) weights[k] = static_cast<T>(1.0 / in.news_lambda[k]);
  r.news_loss = nn::softmax_cross_entropy(tape, r.logits, in.labeled_rows, in.labels, std::move(weights));
  r.total = r.news_loss;
  if (with_users) {
    if (!in.user_target) throw UsageError("forward: user reconstruction target missing");
    r.user_loss = user_loss(tape, decode_adjacency(tape, z), in.user_target, in.user_lambda);
    r.total = nn::add(tape, r.news_loss, r.user_loss);
  }
  return r;
}

nlohmann::json to_json(const LossRecord& r) {
  return {{"epoch", r.epoch}, {"minibatch", r.minibatch}, {"L_t", r.news_loss},
          {"L_u", r.user_loss}, {"L", r.total},          {"wall_ms", r.wall_ms}};
}

namespace {

template <typename T>
constexpr int precision_bytes() {
  return static_cast<int>(sizeof(T));
}

}  // namespace

template <typename T>
nn::Checkpoint state_to_checkpoint(const ModelState<T>& state, const nlohmann::json& meta) {
  auto& model = const_cast<Model<T>&>(state.model);
  nlohmann::json header;
  header["format"] = "usdefake-model";
  header["precision"] = precision_bytes<T>();
  header["model"] = to_json(model.config());
  header["epoch"] = state.epoch;
  const auto& ac = state.optimizer.config();
  header["adam"] = {{"lr", ac.lr}, {"beta1", ac.beta1}, {"beta2", ac.beta2}, {"eps", ac.eps},
                    {"steps", state.optimizer.steps()}};
  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : state.history) history.push_back(to_json(r));
  header["history"] = std::move(history);
  header["meta"] = meta;

  nn::Checkpoint ckpt;
  ckpt.header = header.dump();
  for (auto* p : model.parameters()) ckpt.add(p->name, p->value);
  for (const auto& [name, m] : state.optimizer.moments()) {
    ckpt.add("adam.m/" + name, m.first);
    ckpt.add("adam.v/" + name, m.second);
  }
  return ckpt;
}

template <typename T>
ModelState<T> state_from_checkpoint(const nn::Checkpoint& ckpt, nlohmann::json* meta) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(ckpt.header);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  if (header.value("format", "") != "usdefake-model") throw DataError("checkpoint does not hold a usdefake model");
  try {
    ModelState<T> state;
    state.model = Model<T>(model_config_from_json(header.at("model")), 0);
    for (auto* p : state.model.parameters()) {
      nn::Matrix<T> v = ckpt.get<T>(p->name);
      if (!v.same_shape(p->value))
        throw DataError("checkpoint entry '" + p->name + "' has shape " + nn::shape_string(v) + ", expected " +
                        nn::shape_string(p->value));
      p->value = std::move(v);
    }
    const auto& a = header.at("adam");
    nn::AdamConfig ac;
    ac.lr = a.at("lr").get<double>();
    ac.beta1 = a.at("beta1").get<double>();
    ac.beta2 = a.at("beta2").get<double>();
    ac.eps = a.at("eps").get<double>();
    state.optimizer = nn::Adam<T>(ac);
    std::map<std::string, nn::AdamMoments<T>> moments;
    for (const auto& e : ckpt.entries) {
      if (e.name.rfind("adam.m/", 0) != 0) continue;
      const std::string name = e.name.substr(7);
      moments[name] = {ckpt.get<T>(e.name), ckpt.get<T>("adam.v/" + name)};
    }
    state.optimizer.restore(a.at("steps").get<std::uint64_t>(), std::move(moments));
    state.epoch = header.at("epoch").get<std::size_t>();
    for (const auto& r : header.at("history")) {
      LossRecord rec;
      rec.epoch = r.at("epoch").get<std::size_t>();
      rec.minibatch = r.at("minibatch").get<std::size_t>();
      rec.news_loss = r.at("L_t").get<double>();
      rec.user_loss = r.at("L_u").get<double>();
      rec.total = r.at("L").get<double>();
      rec.wall_ms = r.at("wall_ms").get<double>();
      state.history.push_back(rec);
    }
    if (meta) *meta = header.value("meta", nlohmann::json::object());
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint header: ") + e.what());
  }
}

#define USDEFAKE_INSTANTIATE(T)                                                                              \
  template class Model<T>;                                                                                   \
  template nn::CsrMatrix<T> posting_mean_operator<T>(std::size_t, std::size_t, std::span<const InterEdge>);  \
  template nn::Matrix<T> fuse_user_into_news<T>(const nn::Matrix<T>&, const nn::Matrix<T>&,                  \
                                                std::span<const InterEdge>);                                 \
  template nn::Var fuse_user_into_news<T>(nn::Tape<T>&, nn::Var, nn::Var,                                    \
                                          const std::shared_ptr<const nn::CsrMatrix<T>>&);                   \
  template nn::Matrix<T> classify<T>(const nn::Matrix<T>&, const nn::Matrix<T>&, const nn::Matrix<T>&);      \
  template ForwardInputs<T> minibatch_inputs<T>(const DualLayerSubgraph&, const NormalizedAdjacency&,        \
                                                const NormalizedAdjacency&, const NormalizationCoefficients&, \
                                                std::span<const std::uint8_t>, bool);                        \
  template ForwardInputs<T> full_graph_inputs<T>(const DualLayerGraph&, const NormalizedAdjacency&,          \
                                                 const NormalizedAdjacency&, bool);                          \
  template ForwardResult forward<T>(nn::Tape<T>&, Model<T>&, const ForwardInputs<T>&, const ForwardOptions&); \
  template nn::Checkpoint state_to_checkpoint<T>(const ModelState<T>&, const nlohmann::json&);               \
  template ModelState<T> state_from_checkpoint<T>(const nn::Checkpoint&, nlohmann::json*);

USDEFAKE_INSTANTIATE(float)
USDEFAKE_INSTANTIATE(double)
#undef USDEFAKE_INSTANTIATE

}  // namespace usdefake
