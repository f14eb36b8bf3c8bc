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

#include "usdefake/model.hpp"
#include "usdefake/nn/gradcheck.hpp"

namespace usdefake {

/// Small random dual graph: the first max(1, news / 4) news nodes are
/// sources, the others cascade posts with one or two random posters; edges
/// are Bernoulli, attributes N(0, 1), labels uniform over {0, 1}.
DualLayerGraph random_dual_graph(std::uint64_t seed, std::size_t news, std::size_t users, std::size_t dim,
                                 double news_edge_prob = 0.3, double user_edge_prob = 0.4);

struct ModelGradientCheck {
  nn::GradCheckReport report;
  double news_loss = 0.0;
  double user_loss = 0.0;
  double total = 0.0;
};

/// Finite-difference check of the total training loss of `variant` on
/// the whole graph taken as one minibatch, with alpha and lambda estimated
/// by presampling (roots = half of each layer, depth 1). Every parameter,
/// the classifier included, starts from random values.
ModelGradientCheck check_model_gradients(const DualLayerGraph& graph, Variant variant, std::uint64_t seed,
                                         std::size_t hidden_dim, std::size_t layers = 2,
                                         const nn::GradCheckOptions& options = {});

}  // namespace usdefake
