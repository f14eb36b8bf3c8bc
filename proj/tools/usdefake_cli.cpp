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

// usdefake command-line tool. Talks to the library through the C API only.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "usdefake.h"

namespace {

constexpr int kUsage = 1;

struct Failure {
  int code;
};

void check(udf_status status, const char* what) {
  if (status == UDF_OK) return;
  std::cerr << "usdefake: " << what << ": " << udf_last_error() << " (" << udf_status_string(status) << ")\n";
  throw Failure{static_cast<int>(status)};
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  udf_string_free(s);
  return out;
}

// Inline JSON when the argument starts with '{', otherwise a file path.
std::string json_argument(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return arg;
  std::ifstream in(arg, std::ios::binary);
  if (!in) {
    std::cerr << "usdefake: cannot read JSON file " << arg << "\n";
    throw Failure{kUsage};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) {
    std::cerr << "usdefake: cannot write " << path << "\n";
    throw Failure{UDF_ERR_DATA};
  }
}

struct Dataset {
  udf_dataset* ptr = nullptr;
  explicit Dataset(const std::string& dir) { check(udf_dataset_open(dir.c_str(), &ptr), "loading dataset"); }
  ~Dataset() { udf_dataset_free(ptr); }
};

struct Probabilities {
  udf_probabilities* ptr = nullptr;
  ~Probabilities() { udf_probabilities_free(ptr); }
};

struct Report {
  udf_report* ptr = nullptr;
  ~Report() { udf_report_free(ptr); }
};

struct Model {
  udf_model* ptr = nullptr;
  ~Model() { udf_model_free(ptr); }
};

void print_line(const char* line, void* user_data) {
  auto* out = static_cast<std::ostream*>(user_data);
  *out << line << "\n";
  out->flush();
}

void log_to_stderr(udf_log_level level, const char* message, void*) {
  static const char* names[] = {"debug", "info", "warning", "error"};
  std::cerr << "[usdefake " << names[level] << "] " << message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"usdefake: user-aware fake news detection on dual-layer graphs"};
  app.require_subcommand(1);
  app.fallthrough();

  // Global options: defaults < --config < explicit flags.
  std::uint64_t seed = 0;
  std::string config_arg, variant_arg;
  std::size_t roots = 0, depth = 0, epochs = 0, dim = 0, presample_rounds = 0, threads = 0, folds = 0,
              subgraphs = 0;
  double lr = 0.0, jaccard = 0.0;
  bool verbose = false, quiet = false;
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (default 0)");
  app.add_option("--config", config_arg, "Configuration JSON (file or inline object)");
  app.add_option("--variant", variant_arg, "defake, udefake or us-defake")
      ->check(CLI::IsMember({"defake", "udefake", "us-defake"}));
  auto* roots_opt = app.add_option("--roots", roots, "Random-walk roots per layer")->check(CLI::PositiveNumber);
  auto* depth_opt = app.add_option("--depth", depth, "Random-walk depth");
  auto* epochs_opt = app.add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);
  auto* lr_opt = app.add_option("--lr", lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  auto* dim_opt = app.add_option("--dim", dim, "Embedding size of every GCN layer")->check(CLI::PositiveNumber);
  auto* rounds_opt =
      app.add_option("--presample-rounds", presample_rounds, "Presampling rounds")->check(CLI::PositiveNumber);
  auto* threads_opt = app.add_option("--threads", threads, "Presampling threads")->check(CLI::PositiveNumber);
  auto* folds_opt = app.add_option("--folds", folds, "Number of folds")->check(CLI::PositiveNumber);
  auto* subgraphs_opt =
      app.add_option("--subgraphs", subgraphs, "Subgraphs (minibatches) per epoch")->check(CLI::PositiveNumber);
  auto* jaccard_opt =
      app.add_option("--jaccard", jaccard, "User-edge Jaccard threshold (0 disables)")->check(CLI::Range(0.0, 1.0));
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  std::string data_dir, out_path, synth_config, cache_path, model_path, log_path, json_path;
  std::size_t fold = 0, news_nodes = 10, user_nodes = 8;
  std::size_t check_dim = 6;
  double tolerance = 1e-5;
  bool table = false, progress = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
  synth->add_option("--out", out_path, "Output directory")->required();
  synth->add_option("--synth-config", synth_config, "Generator overrides (JSON file or inline object)");

  auto* presample = app.add_subcommand("presample", "Estimate and cache sampling probabilities");
  presample->add_option("--data", data_dir, "Dataset directory")->required();
  presample->add_option("--cache", cache_path, "Probability cache file (default <data>/probabilities.bin)");

  auto* train = app.add_subcommand("train", "Train one fold; writes a checkpoint and a JSONL log");
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--fold", fold, "Fold index");
  train->add_option("--out", out_path, "Checkpoint path")->required();
  train->add_option("--log", log_path, "Training log (JSON lines; default stdout)");
  train->add_option("--cache", cache_path, "Probability cache file");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on its fold's test split");
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  eval->add_option("--model", model_path, "Checkpoint path")->required();
  eval->add_option("--json", json_path, "Write the metrics report JSON here");

  auto* experiment = app.add_subcommand("experiment", "Train and test every fold, report mean and std");
  experiment->add_option("--data", data_dir, "Dataset directory")->required();
  experiment->add_option("--out", json_path, "Write the report JSON here (default stdout)");
  experiment->add_option("--cache", cache_path, "Probability cache file");
  experiment->add_flag("--table", table, "Print the text table to stdout");
  experiment->add_flag("--progress", progress, "Per-epoch JSON lines on stderr");

  auto* gradcheck = app.add_subcommand("gradcheck", "64-bit finite-difference check of the training loss");
  gradcheck->add_option("--news", news_nodes, "News nodes")->check(CLI::PositiveNumber);
  gradcheck->add_option("--users", user_nodes, "User nodes")->check(CLI::PositiveNumber);
  gradcheck->add_option("--attr-dim", check_dim, "Attribute and embedding size")->check(CLI::PositiveNumber);
  gradcheck->add_option("--tolerance", tolerance, "Maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    udf_set_log_callback(log_to_stderr, nullptr);
    udf_set_log_level(verbose ? UDF_LOG_DEBUG : quiet ? UDF_LOG_WARN : UDF_LOG_INFO);

    udf_config cfg;
    udf_config_default(&cfg);
    if (!config_arg.empty()) check(udf_config_merge_json(&cfg, json_argument(config_arg).c_str()), "--config");
    if (*seed_opt) cfg.seed = seed;
    if (!variant_arg.empty()) check(udf_variant_parse(variant_arg.c_str(), &cfg.variant), "--variant");
    if (*roots_opt) cfg.roots = roots;
    if (*depth_opt) cfg.depth = depth;
    if (*epochs_opt) cfg.epochs = epochs;
    if (*lr_opt) cfg.lr = lr;
    if (*dim_opt) cfg.hidden_dim = dim;
    if (*rounds_opt) cfg.presample_rounds = presample_rounds;
    if (*threads_opt) cfg.threads = threads;
    if (*folds_opt) cfg.folds = folds;
    if (*subgraphs_opt) cfg.subgraphs_per_epoch = subgraphs;
    if (*jaccard_opt) cfg.jaccard_threshold = jaccard;

    if (*synth) {
      const std::string overrides = synth_config.empty() ? std::string() : json_argument(synth_config);
      check(udf_synth_generate(out_path.c_str(), overrides.empty() ? nullptr : overrides.c_str(), cfg.seed),
            "generating dataset");
      Dataset ds(out_path);
      udf_dataset_info info;
      check(udf_dataset_info_get(ds.ptr, &info), "dataset info");
      std::cout << "wrote " << out_path << ": " << info.source_news << " source news (" << info.real_sources
                << " real / " << info.fake_sources << " fake), " << info.news_nodes << " news nodes, "
                << info.user_nodes << " users, T-T " << info.news_edges << ", U-T " << info.inter_edges << ", U-U "
                << info.user_edges << "\n";
      return 0;
    }

    if (*gradcheck) {
      udf_gradcheck_result r;
      check(udf_gradcheck(cfg.seed, cfg.variant, news_nodes, user_nodes, check_dim, &r), "gradient check");
      const bool ok = r.max_relative_error < tolerance && r.coordinates > 0;
      std::printf("{\"variant\": \"%s\", \"coordinates\": %zu, \"max_relative_error\": %.3e, \"loss\": %.17g, "
                  "\"seconds\": %.3f, \"pass\": %s}\n",
                  udf_variant_name(cfg.variant), r.coordinates, r.max_relative_error, r.loss, r.elapsed_seconds,
                  ok ? "true" : "false");
      return ok ? 0 : UDF_ERR_NUMERIC;
    }

    Dataset ds(data_dir);

    if (*presample) {
      if (cache_path.empty()) cache_path = data_dir + "/probabilities.bin";
      Probabilities p;
      check(udf_presample(ds.ptr, &cfg, cache_path.c_str(), &p.ptr), "presampling");
      udf_probabilities_info info;
      check(udf_probabilities_info_get(p.ptr, &info), "probability info");
      std::printf("{\"cache\": \"%s\", \"from_cache\": %s, \"rounds\": %zu, \"news_p_min\": %.6g, "
                  "\"news_p_mean\": %.6g, \"user_p_min\": %.6g, \"user_p_mean\": %.6g}\n",
                  cache_path.c_str(), info.from_cache ? "true" : "false", info.rounds, info.news_min, info.news_mean,
                  info.user_min, info.user_mean);
      return 0;
    }

    Probabilities probs;
    if (!cache_path.empty() && (*train || *experiment))
      check(udf_presample(ds.ptr, &cfg, cache_path.c_str(), &probs.ptr), "presampling");

    if (*train) {
      std::ofstream log_file;
      std::ostream* log_out = &std::cout;
      if (!log_path.empty()) {
        log_file.open(log_path, std::ios::binary | std::ios::trunc);
        if (!log_file) {
          std::cerr << "usdefake: cannot write " << log_path << "\n";
          return UDF_ERR_DATA;
        }
        log_out = &log_file;
      }
      Model m;
      check(udf_train(ds.ptr, &cfg, fold, probs.ptr, print_line, log_out, &m.ptr), "training");
      check(udf_model_save(m.ptr, out_path.c_str()), "saving checkpoint");
      return 0;
    }

    if (*eval) {
      Model m;
      check(udf_model_load(model_path.c_str(), &m.ptr), "loading checkpoint");
      Report r;
      check(udf_evaluate(ds.ptr, m.ptr, &cfg, &r.ptr), "evaluation");
      char* text = nullptr;
      check(udf_report_table(r.ptr, &text), "formatting report");
      std::cout << take_string(text);
      if (!json_path.empty()) {
        char* json = nullptr;
        check(udf_report_json(r.ptr, &json), "formatting report");
        write_text(json_path, take_string(json));
      }
      return 0;
    }

    if (*experiment) {
      Report r;
      check(udf_experiment(ds.ptr, &cfg, probs.ptr, progress ? print_line : nullptr, &std::cerr, &r.ptr),
            "experiment");
      char* json = nullptr;
      check(udf_report_json(r.ptr, &json), "formatting report");
      const std::string report = take_string(json);
      if (json_path.empty())
        std::cout << report;
      else
        write_text(json_path, report);
      if (table) {
        char* text = nullptr;
        check(udf_report_table(r.ptr, &text), "formatting report");
        std::cout << take_string(text);
      }
      return 0;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kUsage;
}
