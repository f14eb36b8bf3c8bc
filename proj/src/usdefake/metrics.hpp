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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "usdefake/graph.hpp"

namespace usdefake {

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool precision_undefined = false;  // no positive predictions; precision reported as 0
  bool recall_undefined = false;     // no positive labels; recall reported as 0

  bool operator==(const Metrics&) const = default;
};

/// Confusion counts and Acc/Pre/Rec/F1 with `positive` (fake = 1) as the
/// positive class. Throws UsageError on empty or unequal inputs.
Metrics compute_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
                        std::uint8_t positive = 1);

struct SplitSpec {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
  std::size_t folds = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  std::vector<NodeId> train, val, test;  // ascending
};

/// Stratified split of `ids` (labels aligned with ids, 0/1). The classes
/// are interleaved by their relative rank after a per-(seed, fold) shuffle,
/// and the sequence is cut at round(train * n) and round(val * n), so every
/// part keeps the class ratio within one node. Throws DataError when a class
/// gets no training node, UsageError when fewer than 10 ids are given.
Split split_nodes(std::span<const NodeId> ids, std::span<const std::int8_t> labels, const SplitSpec& spec,
                  std::size_t fold);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  bool operator==(const MeanStd&) const = default;
};

MeanStd mean_std(std::span<const double> values);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t best_epoch = 0;  // 1-based; earliest epoch with the best validation accuracy
  double best_val_accuracy = 0.0;
  Metrics test;
  std::vector<double> epoch_loss;  // mean total loss per epoch
  std::vector<double> val_accuracy;

  bool operator==(const FoldResult&) const = default;
};

struct MetricsReport {
  std::string variant;
  nlohmann::json config;
  std::vector<FoldResult> folds;
  MeanStd accuracy, precision, recall, f1;

  /// Recomputes the mean/std rows from `folds`.
  void summarize();

  bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const Metrics& m);
Metrics metrics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

/// Plain-text table: one row per fold plus a mean +/- std row.
std::string format_table(const MetricsReport& r);

}  // namespace usdefake
