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

#include "usdefake.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <new>
#include <optional>
#include <string>

#include "usdefake/dataset.hpp"
#include "usdefake/error.hpp"
#include "usdefake/experiment.hpp"
#include "usdefake/log.hpp"
#include "usdefake/synth.hpp"
#include "usdefake/verify.hpp"

using namespace usdefake;

struct udf_dataset {
  DualLayerGraph graph;
  mutable std::mutex mu;
  mutable std::optional<std::pair<double, DualLayerGraph>> prepared;

  const DualLayerGraph& prepared_for(double threshold) const {
    std::lock_guard<std::mutex> lock(mu);
    if (!prepared || prepared->first != threshold) prepared.emplace(threshold, prepare_graph(graph, threshold));
    return prepared->second;
  }
};

struct udf_probabilities {
  SamplingProbabilities probs;
  std::uint64_t graph_hash = 0;
  SamplerConfig sampler;
  bool from_cache = false;
};

struct udf_model {
  ModelState<float> state;
  nlohmann::json meta;
};

struct udf_report {
  MetricsReport report;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
udf_status guarded(F&& f) noexcept {
  try {
    g_last_error.clear();
    f();
    return UDF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<udf_status>(static_cast<int>(e.kind()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return UDF_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return UDF_ERR_DATA;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return UDF_ERR_DATA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UDF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return UDF_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw UsageError(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Variant to_variant(udf_variant v) {
  switch (v) {
    case UDF_VARIANT_DEFAKE: return Variant::kDeFake;
    case UDF_VARIANT_UDEFAKE: return Variant::kUDeFake;
    case UDF_VARIANT_USDEFAKE: return Variant::kUsDeFake;
  }
  throw UsageError("invalid variant value " + std::to_string(static_cast<int>(v)));
}

udf_variant from_variant(Variant v) {
  switch (v) {
    case Variant::kDeFake: return UDF_VARIANT_DEFAKE;
    case Variant::kUDeFake: return UDF_VARIANT_UDEFAKE;
    case Variant::kUsDeFake: return UDF_VARIANT_USDEFAKE;
  }
  return UDF_VARIANT_USDEFAKE;
}

ExperimentConfig to_core(const udf_config& c) {
  ExperimentConfig e;
  e.sampler.roots = c.roots;
  e.sampler.depth = c.depth;
  e.sampler.subgraphs_per_epoch = c.subgraphs_per_epoch;
  e.sampler.presample_rounds = c.presample_rounds;
  e.sampler.threads = c.threads;
  e.train.epochs = c.epochs;
  e.train.lr = c.lr;
  e.train.variant = to_variant(c.variant);
  e.model.hidden_dim = c.hidden_dim;
  e.model.layers = c.layers;
  e.model.fuse_before_final_layer = c.fuse_before_final_layer != 0;
  e.split.train = c.train_fraction;
  e.split.val = c.val_fraction;
  e.split.test = c.test_fraction;
  e.split.folds = c.folds;
  e.jaccard_threshold = c.jaccard_threshold;
  e.set_seed(c.seed);
  return e;
}

void from_core(const ExperimentConfig& e, std::uint64_t seed, udf_config& c) {
  c.seed = seed;
  c.variant = from_variant(e.train.variant);
  c.roots = e.sampler.roots;
  c.depth = e.sampler.depth;
  c.subgraphs_per_epoch = e.sampler.subgraphs_per_epoch;
  c.presample_rounds = e.sampler.presample_rounds;
  c.threads = e.sampler.threads;
  c.epochs = e.train.epochs;
  c.lr = e.train.lr;
  c.hidden_dim = e.model.hidden_dim;
  c.layers = e.model.layers;
  c.fuse_before_final_layer = e.model.fuse_before_final_layer ? 1 : 0;
  c.train_fraction = e.split.train;
  c.val_fraction = e.split.val;
  c.test_fraction = e.split.test;
  c.folds = e.split.folds;
  c.jaccard_threshold = e.jaccard_threshold;
}

nlohmann::json parse_json(const char* text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

const SamplingProbabilities* matching(const udf_probabilities* p, const DualLayerGraph& graph,
                                      const ExperimentConfig& cfg) {
  if (!p) return nullptr;
  const auto& s = p->sampler;
  if (p->graph_hash != structure_hash(graph) || s.roots != cfg.sampler.roots || s.depth != cfg.sampler.depth ||
      s.presample_rounds != cfg.sampler.presample_rounds || s.seed != cfg.sampler.seed)
    throw UsageError("probabilities were estimated for a different graph or sampler configuration");
  return &p->probs;
}

void emit_line(udf_line_fn fn, void* user_data, const nlohmann::json& j) {
  if (fn) fn(j.dump().c_str(), user_data);
}

}  // namespace

extern "C" {

const char* udf_version(void) { return "0.1.0"; }

const char* udf_last_error(void) { return g_last_error.c_str(); }

const char* udf_status_string(udf_status status) {
  switch (status) {
    case UDF_OK: return "ok";
    case UDF_ERR_USAGE: return "usage error";
    case UDF_ERR_DATA: return "data error";
    case UDF_ERR_NUMERIC: return "numeric failure";
    case UDF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void udf_string_free(char* s) { std::free(s); }

void udf_set_log_callback(udf_log_fn fn, void* user_data) {
  if (!fn) {
    log::set_sink({});
    return;
  }
  log::set_sink([fn, user_data](log::Level level, std::string_view msg) {
    const std::string copy(msg);
    fn(static_cast<udf_log_level>(static_cast<int>(level)), copy.c_str(), user_data);
  });
}

void udf_set_log_level(udf_log_level level) { log::set_level(static_cast<log::Level>(static_cast<int>(level))); }

udf_status udf_variant_parse(const char* name, udf_variant* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = from_variant(parse_variant(name));
  });
}

const char* udf_variant_name(udf_variant variant) {
  switch (variant) {
    case UDF_VARIANT_DEFAKE: return "defake";
    case UDF_VARIANT_UDEFAKE: return "udefake";
    case UDF_VARIANT_USDEFAKE: return "us-defake";
  }
  return "unknown";
}

void udf_config_default(udf_config* config) {
  if (!config) return;
  from_core(ExperimentConfig{}, 0, *config);
}

udf_status udf_config_merge_json(udf_config* config, const char* json) {
  return guarded([&] {
    require(config, "config");
    require(json, "json");
    nlohmann::json j = parse_json(json, "config");
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    std::uint64_t seed = config->seed;
    try {
      if (j.contains("seed")) {
        seed = j["seed"].get<std::uint64_t>();
        j.erase("seed");
      }
      for (const char* section : {"sampler", "train", "split"})
        if (j.contains(section) && j[section].is_object() && j[section].contains("seed"))
          seed = j[section]["seed"].get<std::uint64_t>();
      if (j.contains("variant")) {
        if (!j.contains("train")) j["train"] = nlohmann::json::object();
        j["train"]["variant"] = j["variant"];
        j.erase("variant");
      }
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    ExperimentConfig e = to_core(*config);
    merge_json(e, j);
    from_core(e, seed, *config);
  });
}

udf_status udf_config_to_json(const udf_config* config, char** json_out) {
  return guarded([&] {
    require(config, "config");
    require(json_out, "json_out");
    nlohmann::json j = to_json(to_core(*config));
    j["sampler"]["threads"] = config->threads;
    *json_out = dup_string(j.dump(2));
  });
}

udf_status udf_synth_generate(const char* dir, const char* overrides_json, uint64_t seed) {
  return guarded([&] {
    require(dir, "dir");
    SynthConfig c;
    if (overrides_json) merge_json(c, parse_json(overrides_json, "synthetic config"));
    c.seed = seed;
    write_synthetic_bundle(dir, c);
  });
}

udf_status udf_synth_default_json(char** json_out) {
  return guarded([&] {
    require(json_out, "json_out");
    *json_out = dup_string(to_json(SynthConfig{}).dump(2));
  });
}

udf_status udf_dataset_open(const char* dir, udf_dataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = nullptr;
    auto ds = std::make_unique<udf_dataset>();
    ds->graph = load_dataset(dir);
    *out = ds.release();
  });
}

void udf_dataset_free(udf_dataset* dataset) { delete dataset; }

udf_status udf_dataset_info_get(const udf_dataset* dataset, udf_dataset_info* out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    const DatasetMeta m = describe(dataset->graph);
    out->news_nodes = m.news_nodes;
    out->user_nodes = m.user_nodes;
    out->source_news = m.source_news;
    out->real_sources = m.real_sources;
    out->fake_sources = m.fake_sources;
    out->news_edges = m.relations.at("T-T");
    out->inter_edges = m.relations.at("U-T");
    out->user_edges = m.relations.at("U-U");
    out->news_attr_dim = m.news_attr_dim;
    out->user_attr_dim = m.user_attr_dim;
  });
}

udf_status udf_presample(const udf_dataset* dataset, const udf_config* config, const char* cache_path,
                         udf_probabilities** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    const ExperimentConfig cfg = to_core(*config);
    cfg.validate();
    const DualLayerGraph& graph = dataset->prepared_for(cfg.jaccard_threshold);
    auto p = std::make_unique<udf_probabilities>();
    p->graph_hash = structure_hash(graph);
    p->sampler = cfg.sampler;
    if (cache_path && std::filesystem::exists(cache_path)) {
      if (auto cached = load_probabilities(cache_path, p->graph_hash, cfg.sampler)) {
        p->probs = std::move(*cached);
        p->from_cache = true;
      } else {
        log::info("probability cache ", cache_path, " does not match; re-estimating");
      }
    }
    if (!p->from_cache) {
      p->probs = estimate_probabilities(graph, cfg.sampler);
      if (cache_path) save_probabilities(cache_path, p->probs, p->graph_hash, cfg.sampler);
    }
    *out = p.release();
  });
}

void udf_probabilities_free(udf_probabilities* probabilities) { delete probabilities; }

udf_status udf_probabilities_info_get(const udf_probabilities* probabilities, udf_probabilities_info* out) {
  return guarded([&] {
    require(probabilities, "probabilities");
    require(out, "out");
    auto stats = [](const std::vector<double>& v, double& mn, double& mean) {
      mn = v.empty() ? 0.0 : v.front();
      mean = 0.0;
      for (double x : v) {
        mn = std::min(mn, x);
        mean += x;
      }
      if (!v.empty()) mean /= static_cast<double>(v.size());
    };
    out->rounds = probabilities->probs.rounds;
    stats(probabilities->probs.news.node, out->news_min, out->news_mean);
    stats(probabilities->probs.users.node, out->user_min, out->user_mean);
    out->from_cache = probabilities->from_cache ? 1 : 0;
  });
}

udf_status udf_train(const udf_dataset* dataset, const udf_config* config, size_t fold,
                     const udf_probabilities* probabilities, udf_line_fn log_fn, void* user_data, udf_model** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    const ExperimentConfig cfg = to_core(*config);
    cfg.validate();
    if (fold >= cfg.split.folds)
      throw UsageError("fold " + std::to_string(fold) + " out of range (folds = " + std::to_string(cfg.split.folds) +
                       ")");
    const DualLayerGraph& graph = dataset->prepared_for(cfg.jaccard_threshold);
    const SamplingProbabilities* probs = matching(probabilities, graph, cfg);
    SamplingProbabilities estimated;
    if (!probs) {
      estimated = estimate_probabilities(graph, cfg.sampler);
      probs = &estimated;
    }
    const TrainingContext ctx(graph, compute_coefficients(graph, *probs));
    auto on_loss = [&](const LossRecord& r) {
      nlohmann::json j = to_json(r);
      j["fold"] = fold;
      emit_line(log_fn, user_data, j);
    };
    FoldRun run = train_fold(ctx, cfg, fold, on_loss);
    auto m = std::make_unique<udf_model>();
    m->state = std::move(run.best);
    m->meta = {{"fold", fold},
               {"variant", std::string(variant_name(cfg.train.variant))},
               {"best_epoch", run.result.best_epoch},
               {"best_val_accuracy", run.result.best_val_accuracy},
               {"epoch_loss", run.result.epoch_loss},
               {"val_accuracy", run.result.val_accuracy},
               {"graph_hash", std::to_string(structure_hash(graph))},
               {"config", to_json(cfg)}};
    m->meta["config"]["model"] = to_json(m->state.model.config());
    *out = m.release();
  });
}

udf_status udf_model_save(const udf_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    nn::write_checkpoint(path, state_to_checkpoint(model->state, model->meta));
  });
}

udf_status udf_model_load(const char* path, udf_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto m = std::make_unique<udf_model>();
    m->state = state_from_checkpoint<float>(nn::read_checkpoint(path), &m->meta);
    if (!m->meta.contains("fold") || !m->meta.contains("variant"))
      throw DataError("checkpoint lacks training metadata (fold, variant)");
    *out = m.release();
  });
}

udf_status udf_model_info_json(const udf_model* model, char** json_out) {
  return guarded([&] {
    require(model, "model");
    require(json_out, "json_out");
    nlohmann::json j = model->meta;
    j["epoch"] = model->state.epoch;
    j["model"] = to_json(model->state.model.config());
    j["adam_steps"] = model->state.optimizer.steps();
    nlohmann::json history = nlohmann::json::array();
    for (const auto& r : model->state.history) history.push_back(to_json(r));
    j["history"] = std::move(history);
    *json_out = dup_string(j.dump(2));
  });
}

void udf_model_free(udf_model* model) { delete model; }

udf_status udf_evaluate(const udf_dataset* dataset, const udf_model* model, const udf_config* config,
                        udf_report** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(model, "model");
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    const ExperimentConfig cfg = to_core(*config);
    cfg.split.validate();
    const DualLayerGraph& graph = dataset->prepared_for(cfg.jaccard_threshold);
    const auto& meta = model->meta;
    if (meta.contains("graph_hash") && meta["graph_hash"].get<std::string>() != std::to_string(structure_hash(graph)))
      throw DataError("model was trained on a different graph (dataset or Jaccard threshold differ)");
    const auto& mc = model->state.model.config();
    if (mc.news_input_dim != graph.news().attribute_dim() || mc.user_input_dim != graph.users().attribute_dim())
      throw DimensionError("model input dimensions do not match the dataset attributes");
    const std::size_t fold = meta.at("fold").get<std::size_t>();
    const Variant variant = parse_variant(meta.at("variant").get<std::string>());
    const Split split = fold_split(graph, cfg.split, fold);
    if (split.test.empty()) throw UsageError("the test split is empty");
    // Coefficients only matter for training; inference runs with alpha = 1.
    const TrainingContext ctx(graph, NormalizationCoefficients{});
    auto r = std::make_unique<udf_report>();
    r->report.variant = std::string(variant_name(variant));
    r->report.config = meta.value("config", nlohmann::json::object());
    FoldResult fr;
    fr.fold = fold;
    fr.best_epoch = meta.value("best_epoch", std::size_t{0});
    fr.best_val_accuracy = meta.value("best_val_accuracy", 0.0);
    fr.test = evaluate_nodes(ctx, model->state.model, variant, split.test);
    r->report.folds.push_back(fr);
    r->report.summarize();
    *out = r.release();
  });
}

udf_status udf_experiment(const udf_dataset* dataset, const udf_config* config, const udf_probabilities* probabilities,
                          udf_line_fn progress_fn, void* user_data, udf_report** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    const ExperimentConfig cfg = to_core(*config);
    cfg.validate();
    const DualLayerGraph& graph = dataset->prepared_for(cfg.jaccard_threshold);
    const SamplingProbabilities* probs = matching(probabilities, graph, cfg);
    auto on_epoch = [&](const EpochEvent& e) {
      emit_line(progress_fn, user_data,
                {{"fold", e.fold},
                 {"epoch", e.summary.epoch},
                 {"L_t", e.summary.news_loss},
                 {"L_u", e.summary.user_loss},
                 {"L", e.summary.total},
                 {"val_accuracy", e.val_accuracy},
                 {"skipped_minibatches", e.summary.skipped}});
    };
    auto r = std::make_unique<udf_report>();
    r->report = run_prepared_experiment(graph, cfg, probs, on_epoch);
    *out = r.release();
  });
}

udf_status udf_report_json(const udf_report* report, char** json_out) {
  return guarded([&] {
    require(report, "report");
    require(json_out, "json_out");
    *json_out = dup_string(to_json(report->report).dump(2) + "\n");
  });
}

udf_status udf_report_table(const udf_report* report, char** text_out) {
  return guarded([&] {
    require(report, "report");
    require(text_out, "text_out");
    *text_out = dup_string(format_table(report->report));
  });
}

udf_status udf_report_summary(const udf_report* report, udf_summary* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const auto& r = report->report;
    out->variant = r.variant.c_str();
    out->folds = r.folds.size();
    out->acc_mean = r.accuracy.mean;
    out->acc_std = r.accuracy.std;
    out->pre_mean = r.precision.mean;
    out->pre_std = r.precision.std;
    out->rec_mean = r.recall.mean;
    out->rec_std = r.recall.std;
    out->f1_mean = r.f1.mean;
    out->f1_std = r.f1.std;
  });
}

udf_status udf_report_fold(const udf_report* report, size_t index, udf_fold_metrics* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    if (index >= report->report.folds.size()) throw UsageError("fold index out of range");
    const FoldResult& f = report->report.folds[index];
    out->fold = f.fold;
    out->best_epoch = f.best_epoch;
    out->best_val_accuracy = f.best_val_accuracy;
    out->accuracy = f.test.accuracy;
    out->precision = f.test.precision;
    out->recall = f.test.recall;
    out->f1 = f.test.f1;
    out->tp = f.test.tp;
    out->fp = f.test.fp;
    out->tn = f.test.tn;
    out->fn = f.test.fn;
    out->epochs = f.epoch_loss.size();
  });
}

udf_status udf_report_epoch_loss(const udf_report* report, size_t index, size_t epoch, double* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    if (index >= report->report.folds.size()) throw UsageError("fold index out of range");
    const auto& losses = report->report.folds[index].epoch_loss;
    if (epoch >= losses.size()) throw UsageError("epoch index out of range");
    *out = losses[epoch];
  });
}

void udf_report_free(udf_report* report) { delete report; }

udf_status udf_gradcheck(uint64_t seed, udf_variant variant, size_t news_nodes, size_t user_nodes, size_t dim,
                         udf_gradcheck_result* out) {
  return guarded([&] {
    require(out, "out");
    const auto start = std::chrono::steady_clock::now();
    const DualLayerGraph graph = random_dual_graph(seed, news_nodes, user_nodes, dim);
    const ModelGradientCheck check = check_model_gradients(graph, to_variant(variant), seed, dim, 2);
    out->max_relative_error = check.report.max_relative_error;
    out->coordinates = check.report.coordinates_checked;
    out->loss = check.total;
    out->elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
}

}  // extern "C"
