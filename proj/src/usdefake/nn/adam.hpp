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
#include <map>
#include <span>
#include <string>

#include "usdefake/nn/tape.hpp"

namespace usdefake::nn {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamMoments {
  Matrix<T> first;
  Matrix<T> second;
};

/// Adam with bias correction. Moments are keyed by parameter name so a
/// subset of parameters may be stepped (frozen groups keep no state).
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// One update over `params` using their current grads; zeroes the grads.
  void step(std::span<Parameter<T>* const> params);

  std::uint64_t steps() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return config_; }
  void set_lr(double lr) { config_.lr = lr; }

  const std::map<std::string, AdamMoments<T>>& moments() const noexcept { return moments_; }

  // Checkpoint restore.
  void restore(std::uint64_t step, std::map<std::string, AdamMoments<T>> moments) {
    step_ = step;
    moments_ = std::move(moments);
  }

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::map<std::string, AdamMoments<T>> moments_;
};

}  // namespace usdefake::nn
