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
#include <functional>
#include <span>
#include <string>

#include "usdefake/nn/tape.hpp"

namespace usdefake::nn {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Coordinates sampled per parameter; parameters with fewer are checked fully.
  std::size_t coordinates_per_parameter = 100;
  /// Gradients smaller than this are compared on an absolute scale.
  double denominator_floor = 1e-4;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t coordinates_checked = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool vacuous() const noexcept { return coordinates_checked == 0; }
};

/// Evaluates the loss; when `with_backward` is true it must also run the tape
/// backward so that every parameter's grad holds d(loss)/d(param).
using LossFunction = std::function<double(bool with_backward)>;

/// Central-difference check of tape gradients:
///   numeric = (f(w + eps) - f(w - eps)) / (2 eps)
///   error   = |analytic - numeric| / max(|analytic|, |numeric|, floor)
/// Throws NumericError when the loss is not finite.
GradCheckReport gradient_check(const LossFunction& loss, std::span<Parameter<double>* const> params,
                               const GradCheckOptions& options = {});

}  // namespace usdefake::nn
