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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "usdefake/graph.hpp"

namespace usdefake {

// Dataset directory (UTF-8, tab separated, '#' starts a comment line):
//   news_edges.tsv   src  dst
//   user_edges.tsv   src  dst
//   inter_edges.tsv  user news
//   news_attrs.tsv   id   d_t floats
//   user_attrs.tsv   id   d_u floats
//   news_labels.tsv  id   {0,1}
//   news_roles.tsv   id   {source,cascade}
//   meta.json        dimensions and counts
inline constexpr int kDatasetFormatVersion = 1;

struct DatasetMeta {
  std::size_t news_nodes = 0;
  std::size_t user_nodes = 0;
  std::size_t news_attr_dim = 0;  // d_t
  std::size_t user_attr_dim = 0;  // d_u
  std::size_t source_news = 0;
  std::size_t real_sources = 0;
  std::size_t fake_sources = 0;
  std::map<std::string, std::size_t> relations;  // "T-T", "U-T", "U-U" (undirected, deduplicated)

  bool operator==(const DatasetMeta&) const = default;
};

nlohmann::json to_json(const DatasetMeta& m);
DatasetMeta meta_from_json(const nlohmann::json& j);

/// Counts of an in-memory graph in meta.json terms.
DatasetMeta describe(const DualLayerGraph& graph);

DatasetMeta read_meta(const std::filesystem::path& dir);

/// Loads and validates a dataset directory; cascade posts inherit their
/// source's label. Errors carry file and line. `meta` receives meta.json.
DualLayerGraph load_dataset(const std::filesystem::path& dir, DatasetMeta* meta = nullptr);

/// Writes the directory format plus meta.json; `manifest` (when not null)
/// goes to manifest.json. Output is byte-stable for equal inputs.
void save_dataset(const std::filesystem::path& dir, const DualLayerGraph& graph,
                  const nlohmann::json& manifest = nullptr);

/// For every news node, the source news of its connected component. Throws
/// DataError when a component holds zero or several sources.
std::vector<NodeId> cascade_sources(const AttributedLayer& news);

/// Copies each source's label onto its cascade posts.
DualLayerGraph propagate_source_labels(DualLayerGraph graph);

}  // namespace usdefake
