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
#include <filesystem>

#include <json.hpp>

#include "usdefake/graph.hpp"

namespace usdefake {

struct SynthConfig {
  std::size_t n_source_news = 1000;
  std::size_t n_fake_source_news = 500;
  std::size_t cascade_depth = 3;
  double mean_cascade_fanout = 8.0;  // expected direct replies to a source; at least one
  std::size_t n_users = 2000;
  std::size_t n_credible_users = 1000;
  std::size_t attr_dim_news = 32;
  std::size_t attr_dim_user = 32;
  double news_signal_strength = 0.3;  // sigma_t
  double user_signal_strength = 0.9;  // sigma_u
  double posting_fidelity = 0.9;      // rho
  double news_mean_scale = 0.5;       // norm of a news class mean
  double user_mean_scale = 1.0;       // norm of a user community mean
  double intra_community_prob = 0.9;
  double inter_community_prob = 0.02;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SynthConfig& c);
/// Overrides the fields present in `j`; unknown keys are a UsageError.
void merge_json(SynthConfig& c, const nlohmann::json& j);

/// Source news with cascades (level sizes are Poisson in the size of the
/// level above, parents uniform in that level), a two-community user layer
/// and one posting user per cascade post. Attributes of node class or
/// community y are sigma * mu_y + (1 - sigma) * N(0, I). News ids are laid
/// out cascade by cascade, source first.
DualLayerGraph generate_synthetic(const SynthConfig& config);

/// Generates and writes a dataset directory with manifest.json.
DualLayerGraph write_synthetic_bundle(const std::filesystem::path& dir, const SynthConfig& config);

}  // namespace usdefake
