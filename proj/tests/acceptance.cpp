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

// Acceptance suite: one PASS/FAIL line per criterion. Run with no arguments
// for all criteria, or with criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "usdefake/experiment.hpp"
#include "usdefake/log.hpp"
#include "usdefake/metrics.hpp"
#include "usdefake/news_prop.hpp"
#include "usdefake/sampler.hpp"
#include "usdefake/synth.hpp"
#include "usdefake/verify.hpp"

using namespace usdefake;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradTolerance = 1e-5;        // 1
constexpr double kGradBudgetSeconds = 60;      // 1
constexpr double kPathTolerance = 0.02;        // 2
constexpr double kPathBudgetSeconds = 30;      // 2
constexpr double kUnbiasedTolerance = 0.05;    // 3
constexpr double kUnbiasedBudgetSeconds = 300; // 3
constexpr double kDenseTolerance = 1e-10;      // 4
constexpr double kMinAccuracy = 0.95;          // 5
constexpr double kMinGain = 0.05;              // 5
constexpr double kEndToEndBudgetSeconds = 900; // 5
constexpr double kMaxLossRatio = 0.5;          // 6
constexpr double kMaxScaleSpread = 2.0;        // 9

// End-to-end settings shared by 5 and 6: the default synthetic bundle and
// default hyperparameters except a 32-wide embedding.
constexpr std::size_t kEndToEndDim = 32;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto start = Clock::now();
  auto graph = random_dual_graph(2024, 10, 8, 6);
  nn::GradCheckOptions opts;
  opts.coordinates_per_parameter = 1000;  // every coordinate
  auto res = check_model_gradients(graph, Variant::kUsDeFake, 2024, 6, 2, opts);
  const double secs = seconds_since(start);
  const bool ok = !res.report.vacuous() && res.report.max_relative_error < kGradTolerance && secs < kGradBudgetSeconds;
  return {ok, fmt("max relative error %.3g over %zu coordinates (< %.0e), %.2f s (< %.0f s)",
                  res.report.max_relative_error, res.report.coordinates_checked, kGradTolerance, secs,
                  kGradBudgetSeconds)};
}

Outcome sampler_distribution() {
  const auto start = Clock::now();
  auto layer = testing::plain_layer(3, {{0, 1}, {1, 2}});
  auto p = estimate_layer_probabilities(layer.adjacency, 1, 1, 100000, 7, 0);
  const double expect[3] = {0.5, 1.0, 0.5};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(p.node[i] - expect[i]));
  const double secs = seconds_since(start);
  return {worst <= kPathTolerance && secs < kPathBudgetSeconds,
          fmt("p = (%.4f, %.4f, %.4f), max deviation %.4f (<= %.2f), %.2f s", p.node[0], p.node[1], p.node[2], worst,
              kPathTolerance, secs)};
}

// Worst per-node relative L2 error of the Monte-Carlo mean of the corrected
// aggregation of each input pair, all pairs evaluated on the same subgraphs.
struct AggregationRun {
  std::vector<double> worst;
  std::size_t unseen = 0;
};

AggregationRun run_aggregation(const AttributedLayer& layer, const std::vector<nn::Matrix<double>>& xs,
                               const std::vector<nn::Matrix<double>>& ws, std::size_t roots, std::size_t depth) {
  const std::size_t n = layer.node_count();
  const auto norm = normalize_adjacency(layer);
  const auto probs = estimate_layer_probabilities(layer.adjacency, roots, depth, 10000, 51, 0);
  const auto coef = compute_coefficients(layer.adjacency, probs, n);

  std::vector<testing::Dense> full;
  std::vector<std::vector<std::vector<double>>> sum;
  for (std::size_t q = 0; q < xs.size(); ++q) {
    full.push_back(testing::matmul(testing::matmul(testing::to_dense(norm.matrix.to_dense()), testing::to_dense(xs[q])),
                                   testing::to_dense(ws[q])));
    sum.emplace_back(n, std::vector<double>(ws[q].cols(), 0.0));
  }
  std::vector<std::size_t> hits(n, 0);
  LayerWalker walker(layer.adjacency);
  Rng rng(mix_seed(52, 0));
  std::vector<NodeId> nodes;
  for (int s = 0; s < 20000; ++s) {
    walker.sample(roots, depth, rng, nodes);
    auto slice = induced_slice(layer, nodes);
    auto op = std::make_shared<const nn::CsrMatrix<double>>(build_propagation<double>(slice, norm, &coef));
    for (NodeId k = 0; k < slice.size(); ++k) ++hits[slice.to_global[k]];
    for (std::size_t q = 0; q < xs.size(); ++q) {
      nn::Matrix<double> xq(slice.size(), xs[q].cols());
      for (NodeId k = 0; k < slice.size(); ++k)
        for (std::size_t c = 0; c < xs[q].cols(); ++c) xq(k, c) = xs[q](slice.to_global[k], c);
      nn::Tape<double> tape;
      const auto& h = tape.value(gcn_forward(tape, op, tape.constant(std::move(xq)), tape.constant(ws[q]), false));
      for (NodeId k = 0; k < slice.size(); ++k)
        for (std::size_t c = 0; c < h.cols(); ++c) sum[q][slice.to_global[k]][c] += h(k, c);
    }
  }
  AggregationRun out;
  out.worst.assign(xs.size(), 0.0);
  for (NodeId i = 0; i < n; ++i) {
    if (!hits[i]) {
      ++out.unseen;
      continue;
    }
    for (std::size_t q = 0; q < xs.size(); ++q) {
      double num = 0.0, den = 0.0;
      for (std::size_t c = 0; c < ws[q].cols(); ++c) {
        const double d = sum[q][i][c] / double(hits[i]) - full[q][i][c];
        num += d * d;
        den += full[q][i][c] * full[q][i][c];
      }
      out.worst[q] = std::max(out.worst[q], std::sqrt(num / den));
    }
  }
  return out;
}

// Gated on non-negative H and W so no node's full aggregation nearly cancels.
// With zero-mean inputs such nodes amplify the per-arc noise of alpha from
// 10000 pre-samples; that error is reported but not gated.
Outcome aggregation_unbiasedness() {
  const auto start = Clock::now();
  constexpr std::size_t n = 50, din = 4, dout = 3, roots = 8, depth = 2;
  std::mt19937_64 g(50);
  const auto layer = testing::plain_layer(n, testing::random_edges(n, 0.08, g), din);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  nn::Matrix<double> x_pos(n, din), w_pos(din, dout);
  for (double& v : x_pos.values()) v = unit(g);
  for (double& v : w_pos.values()) v = unit(g);
  nn::Matrix<double> x_signed = testing::random_matrix<double>(n, din, g);
  nn::Matrix<double> w_signed = testing::random_matrix<double>(din, dout, g);

  const auto run = run_aggregation(layer, {x_pos, x_signed}, {w_pos, w_signed}, roots, depth);
  const double secs = seconds_since(start);
  return {run.unseen == 0 && run.worst[0] < kUnbiasedTolerance && secs < kUnbiasedBudgetSeconds,
          fmt("worst per-node relative L2 error %.4f (< %.2f) with non-negative H, W; %.4f with zero-mean "
              "H, W (not gated); %zu unsampled nodes, %.2f s",
              run.worst[0], kUnbiasedTolerance, run.worst[1], run.unseen, secs)};
}

Outcome dense_oracle() {
  std::mt19937_64 g(404);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + t % 29;  // 2..30 nodes
    auto edges = testing::random_edges(n, 0.05 + 0.02 * t, g);
    auto layer = testing::plain_layer(n, edges, 5);
    const auto norm = normalize_adjacency(layer);
    std::vector<NodeId> all(n);
    for (NodeId i = 0; i < n; ++i) all[i] = i;
    const auto slice = induced_slice(layer, all);
    LayerCoefficients ones{std::vector<double>(layer.adjacency.arc_count(), 1.0), std::vector<double>(n, 1.0)};
    auto op = std::make_shared<const nn::CsrMatrix<double>>(build_propagation<double>(slice, norm, &ones));
    auto h = testing::random_matrix<double>(n, 5, g);
    auto w = testing::random_matrix<double>(5, 4, g);
    nn::Tape<double> tape;
    const auto& out = tape.value(gcn_forward(tape, op, tape.constant(h), tape.constant(w), false));
    auto oracle = testing::matmul(
        testing::matmul(testing::dense_normalize(testing::dense_adjacency(n, edges)), testing::to_dense(h)),
        testing::to_dense(w));
    worst = std::max(worst, testing::max_abs_diff(testing::to_dense(out), oracle));
  }
  return {worst < kDenseTolerance, fmt("max abs difference %.3g over 20 graphs (< %.0e)", worst, kDenseTolerance)};
}

// Shared by 5 and 6.
struct EndToEnd {
  DualLayerGraph graph;
  double generate_seconds = 0.0;
  std::optional<MetricsReport> usdefake;  // seed 0, 5 folds
};

EndToEnd& end_to_end() {
  static EndToEnd e = [] {
    const auto start = Clock::now();
    EndToEnd x;
    x.graph = generate_synthetic(SynthConfig{});
    x.generate_seconds = seconds_since(start);
    return x;
  }();
  return e;
}

ExperimentConfig end_to_end_config(Variant v, std::uint64_t seed) {
  ExperimentConfig c;
  c.model.hidden_dim = kEndToEndDim;
  c.train.variant = v;
  c.set_seed(seed);
  return c;
}

Outcome ablation_trend() {
  auto& e = end_to_end();
  const auto start = Clock::now();
  auto cfg = end_to_end_config(Variant::kUsDeFake, 0);
  const auto prepared = prepare_graph(e.graph, cfg.jaccard_threshold);
  const auto probs = estimate_probabilities(prepared, cfg.sampler);
  e.usdefake = run_prepared_experiment(prepared, cfg, &probs);
  auto defake = run_prepared_experiment(prepared, end_to_end_config(Variant::kDeFake, 0), &probs);
  const double secs = seconds_since(start) + e.generate_seconds;
  const double us = e.usdefake->accuracy.mean, de = defake.accuracy.mean;
  const bool ok = us >= kMinAccuracy && us - de >= kMinGain && secs < kEndToEndBudgetSeconds;
  return {ok, fmt("Us-DeFake acc %.4f +/- %.4f (>= %.2f), DeFake acc %.4f +/- %.4f, gain %.4f (>= %.2f), %.0f s "
                  "(< %.0f s)",
                  us, e.usdefake->accuracy.std, kMinAccuracy, de, defake.accuracy.std, us - de, kMinGain, secs,
                  kEndToEndBudgetSeconds)};
}

Outcome loss_decrease() {
  auto& e = end_to_end();
  std::string detail;
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::vector<double> losses;
    if (seed == 0 && e.usdefake) {
      losses = e.usdefake->folds.front().epoch_loss;
    } else {
      auto cfg = end_to_end_config(Variant::kUsDeFake, seed);
      cfg.split.folds = 1;
      losses = run_experiment(e.graph, cfg).folds.front().epoch_loss;
    }
    const double ratio = losses.back() / losses.front();
    ok = ok && losses.size() == 30 && ratio < kMaxLossRatio;
    detail += fmt("%sseed %llu: L1 %.2f L30 %.2f ratio %.3f", seed ? "; " : "", (unsigned long long)seed,
                  losses.front(), losses.back(), ratio);
  }
  return {ok, detail + fmt(" (< %.2f)", kMaxLossRatio)};
}

Outcome metrics_oracle() {
  std::mt19937_64 g(777);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + g() % 200;
    std::bernoulli_distribution pp(std::uniform_real_distribution<double>(0.0, 1.0)(g));
    std::bernoulli_distribution yy(std::uniform_real_distribution<double>(0.0, 1.0)(g));
    std::vector<std::uint8_t> pred(n), truth(n);
    // confusion[predicted][true]
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = pp(g);
      truth[i] = yy(g);
      ++confusion[pred[i]][truth[i]];
    }
    const std::size_t tp = confusion[1][1], fp = confusion[1][0], fn = confusion[0][1], tn = confusion[0][0];
    const double acc = double(tp + tn) / double(tp + tn + fp + fn);
    const double pre = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    const double rec = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    const double f1 = pre + rec > 0 ? 2.0 * pre * rec / (pre + rec) : 0.0;
    const auto m = compute_metrics(pred, truth);
    const bool same = m.tp == tp && m.fp == fp && m.fn == fn && m.tn == tn && m.accuracy == acc &&
                      m.precision == pre && m.recall == rec && m.f1 == f1 &&
                      m.precision_undefined == (tp + fp == 0) && m.recall_undefined == (tp + fn == 0);
    if (!same) ++mismatches;
  }
  return {mismatches == 0, fmt("%zu of 1000 random vectors disagree (exact comparison)", mismatches)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const std::string& cli) {
  const fs::path work = fs::temp_directory_path() / "usdefake_acceptance_determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string data = (work / "data").string();
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" -q " + args;
    return std::system(cmd.c_str());
  };
  int rc = run("--seed 11 synth --out \"" + data +
               "\" --synth-config '{\"n_source_news\": 200, \"n_fake_source_news\": 100, \"n_users\": 300, "
               "\"n_credible_users\": 150}'");
  if (rc != 0) return {false, fmt("synth failed with status %d", rc)};
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = work / ("report" + std::to_string(i) + ".json");
    rc = run("--seed 3 --threads 1 --epochs 4 --folds 2 --dim 16 --presample-rounds 500 experiment --data \"" +
             data + "\" --out \"" + out.string() + "\"");
    if (rc != 0) return {false, fmt("experiment run %d failed with status %d", i + 1, rc)};
    reports[i] = read_file(out);
  }
  const bool ok = !reports[0].empty() && reports[0] == reports[1];
  fs::remove_all(work);
  return {ok, fmt("two runs: %zu and %zu bytes, %s", reports[0].size(), reports[1].size(),
                  ok ? "byte-identical" : "different")};
}

Outcome sampler_cost() {
  std::mt19937_64 g(99);
  std::size_t violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t news = 2 + g() % 60, users = 2 + g() % 60;
    const double pn = std::uniform_real_distribution<double>(0.0, 0.5)(g);
    const double pu = std::uniform_real_distribution<double>(0.0, 0.5)(g);
    auto graph = random_dual_graph(g(), news, users, 1, pn, pu);
    SamplerConfig cfg;
    cfg.roots = 1 + g() % 40;
    cfg.depth = g() % 6;
    Rng rng(g());
    auto sub = random_walk_sample(graph, cfg, rng);
    const std::size_t bound = cfg.roots * (cfg.depth + 1);
    if (sub.news.size() > bound || sub.users.size() > bound) ++violations;
  }

  // wall time of presampling the default synthetic news layer
  const auto& layer = end_to_end().graph.news();
  double per_round[3];
  const std::size_t rounds[3] = {1000, 2000, 4000};
  for (int k = 0; k < 3; ++k) {
    const auto start = Clock::now();
    estimate_layer_probabilities(layer.adjacency, 3000, 2, rounds[k], 5, 0, 1);
    per_round[k] = seconds_since(start) / double(rounds[k]);
  }
  const double spread = *std::max_element(per_round, per_round + 3) / *std::min_element(per_round, per_round + 3);
  return {violations == 0 && spread <= kMaxScaleSpread,
          fmt("%zu of 1000 samples exceed r*(h+1); presample ms/round at N=1k,2k,4k: %.3f %.3f %.3f, spread %.2f "
              "(<= %.1f)",
              violations, 1e3 * per_round[0], 1e3 * per_round[1], 1e3 * per_round[2], spread, kMaxScaleSpread)};
}

}  // namespace

int main(int argc, char** argv) {
  log::set_level(log::Level::kWarn);
  const std::string cli = USDEFAKE_CLI;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"sampler distribution oracle", sampler_distribution},
      {"aggregation unbiasedness", aggregation_unbiasedness},
      {"dense-oracle equivalence", dense_oracle},
      {"end-to-end ablation trend", ablation_trend},
      {"loss decrease", loss_decrease},
      {"metrics oracle", metrics_oracle},
      {"determinism", [&] { return determinism(cli); }},
      {"sampler cost bound", sampler_cost},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = int(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
