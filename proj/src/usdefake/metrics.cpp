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

#include "usdefake/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "usdefake/error.hpp"
#include "usdefake/log.hpp"
#include "usdefake/sampler.hpp"

namespace usdefake {

Metrics compute_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
                        std::uint8_t positive) {
  if (predicted.size() != truth.size())
    throw UsageError("metrics: " + std::to_string(predicted.size()) + " predictions for " +
                     std::to_string(truth.size()) + " labels");
  if (predicted.empty()) throw UsageError("metrics: no predictions");
  Metrics m;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == positive, t = truth[i] == positive;
    if (p && t) ++m.tp;
    else if (p) ++m.fp;
    else if (t) ++m.fn;
    else ++m.tn;
  }
  const double n = static_cast<double>(predicted.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / n;
  m.precision_undefined = m.tp + m.fp == 0;
  m.recall_undefined = m.tp + m.fn == 0;
  m.precision = m.precision_undefined ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  m.recall = m.recall_undefined ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

void SplitSpec::validate() const {
  if (train < 0.0 || val < 0.0 || test < 0.0) throw UsageError("split fractions must be >= 0");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    throw UsageError("split fractions must sum to 1 (got " + std::to_string(train + val + test) + ")");
  if (folds == 0) throw UsageError("fold count must be positive");
}

Split split_nodes(std::span<const NodeId> ids, std::span<const std::int8_t> labels, const SplitSpec& spec,
                  std::size_t fold) {
  spec.validate();
  if (ids.size() != labels.size()) throw UsageError("split: ids and labels differ in length");
  if (ids.size() < 10)
    throw UsageError("split: need at least 10 source news, got " + std::to_string(ids.size()));
  if (spec.val == 0.0 && spec.test == 0.0) log::warn("split: validation and test fractions are 0; all ids train");

  std::vector<NodeId> by_class[2];
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (labels[k] != 0 && labels[k] != 1)
      throw DataError("split: source news " + std::to_string(ids[k]) + " has no label");
    by_class[labels[k]].push_back(ids[k]);
  }
  Rng rng(mix_seed(spec.seed, fold));
  struct Item {
    double key;
    int cls;
    NodeId id;
  };
  std::vector<Item> order;
  order.reserve(ids.size());
  for (int c = 0; c < 2; ++c) {
    auto& v = by_class[c];
    std::sort(v.begin(), v.end());
    std::shuffle(v.begin(), v.end(), rng);
    for (std::size_t j = 0; j < v.size(); ++j)
      order.push_back({(static_cast<double>(j) + 0.5) / static_cast<double>(v.size()), c, v[j]});
  }
  std::sort(order.begin(), order.end(),
            [](const Item& a, const Item& b) { return a.key != b.key ? a.key < b.key : a.cls < b.cls; });

  const std::size_t n = order.size();
  const std::size_t n_train = std::min(n, static_cast<std::size_t>(std::llround(spec.train * double(n))));
  const std::size_t n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(spec.val * double(n))));
  Split s;
  bool train_has[2] = {false, false};
  for (std::size_t k = 0; k < n; ++k) {
    if (k < n_train) {
      s.train.push_back(order[k].id);
      train_has[order[k].cls] = true;
    } else if (k < n_train + n_val) {
      s.val.push_back(order[k].id);
    } else {
      s.test.push_back(order[k].id);
    }
  }
  for (int c = 0; c < 2; ++c)
    if (!train_has[c])
      throw DataError("split: class " + std::to_string(c) + " has no training node; a larger dataset is needed");
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(values.size()));
  return r;
}

void MetricsReport::summarize() {
  std::vector<double> a, p, r, f;
  for (const auto& fr : folds) {
    a.push_back(fr.test.accuracy);
    p.push_back(fr.test.precision);
    r.push_back(fr.test.recall);
    f.push_back(fr.test.f1);
  }
  accuracy = mean_std(a);
  precision = mean_std(p);
  recall = mean_std(r);
  f1 = mean_std(f);
}

nlohmann::json to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},             {"tp", m.tp},               {"fp", m.fp},
          {"tn", m.tn},             {"fn", m.fn},               {"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined}};
}

Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.tp = j.at("tp").get<std::size_t>();
  m.fp = j.at("fp").get<std::size_t>();
  m.tn = j.at("tn").get<std::size_t>();
  m.fn = j.at("fn").get<std::size_t>();
  m.precision_undefined = j.at("precision_undefined").get<bool>();
  m.recall_undefined = j.at("recall_undefined").get<bool>();
  return m;
}

namespace {

nlohmann::json to_json(const MeanStd& s) { return {{"mean", s.mean}, {"std", s.std}}; }

MeanStd mean_std_from_json(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

}  // namespace

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds)
    folds.push_back({{"fold", f.fold},
                     {"best_epoch", f.best_epoch},
                     {"best_val_accuracy", f.best_val_accuracy},
                     {"test", to_json(f.test)},
                     {"epoch_loss", f.epoch_loss},
                     {"val_accuracy", f.val_accuracy}});
  return {{"variant", r.variant},
          {"config", r.config},
          {"folds", folds},
          {"summary",
           {{"accuracy", to_json(r.accuracy)},
            {"precision", to_json(r.precision)},
            {"recall", to_json(r.recall)},
            {"f1", to_json(r.f1)}}}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  try {
    MetricsReport r;
    r.variant = j.at("variant").get<std::string>();
    r.config = j.at("config");
    for (const auto& f : j.at("folds")) {
      FoldResult fr;
      fr.fold = f.at("fold").get<std::size_t>();
      fr.best_epoch = f.at("best_epoch").get<std::size_t>();
      fr.best_val_accuracy = f.at("best_val_accuracy").get<double>();
      fr.test = metrics_from_json(f.at("test"));
      fr.epoch_loss = f.at("epoch_loss").get<std::vector<double>>();
      fr.val_accuracy = f.at("val_accuracy").get<std::vector<double>>();
      r.folds.push_back(std::move(fr));
    }
    const auto& s = j.at("summary");
    r.accuracy = mean_std_from_json(s.at("accuracy"));
    r.precision = mean_std_from_json(s.at("precision"));
    r.recall = mean_std_from_json(s.at("recall"));
    r.f1 = mean_std_from_json(s.at("f1"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics report: ") + e.what());
  }
}

std::string format_table(const MetricsReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << std::left << std::setw(12) << "Variant" << std::setw(8) << "Fold" << std::setw(16) << "Acc"
     << std::setw(16) << "Pre" << std::setw(16) << "Rec" << "F1\n";
  for (const auto& f : r.folds)
    os << std::setw(12) << r.variant << std::setw(8) << f.fold << std::setw(16) << f.test.accuracy
       << std::setw(16) << f.test.precision << std::setw(16) << f.test.recall << f.test.f1 << "\n";
  auto cell = [](const MeanStd& s) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(3) << s.mean << "+/-" << s.std;
    return c.str();
  };
  os << std::setw(12) << r.variant << std::setw(8) << "mean" << std::setw(16) << cell(r.accuracy) << std::setw(16)
     << cell(r.precision) << std::setw(16) << cell(r.recall) << cell(r.f1) << "\n";
  return os.str();
}

}  // namespace usdefake
