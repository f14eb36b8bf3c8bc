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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "usdefake/graph.hpp"
#include "usdefake/nn/tape.hpp"
#include "usdefake/sampler.hpp"

namespace usdefake {

/// Aggregation operator of a sampled slice: row i holds Ã_ii on the diagonal
/// and Ã_{i,v} / alpha_{v,i} for every induced arc (i, v). Arcs not covered
/// by `coefficients` (null or size mismatch) use alpha = 1 and are counted in
/// `missing_alpha`.
template <typename T>
nn::CsrMatrix<T> build_propagation(const LayerSlice& slice, const NormalizedAdjacency& norm,
                                   const LayerCoefficients* coefficients, std::size_t* missing_alpha = nullptr);

/// Full-graph operator with alpha = 1, i.e. Ã itself.
template <typename T>
nn::CsrMatrix<T> full_propagation(const NormalizedAdjacency& norm);

/// One aggregation layer: H' = S (H W), followed by ReLU when `activate`.
template <typename T>
nn::Var gcn_forward(nn::Tape<T>& tape, const std::shared_ptr<const nn::CsrMatrix<T>>& propagation,
                    nn::Var h_prev, nn::Var weight, bool activate);

/// Stack of GCN weight matrices input_dim -> dims[0] -> ... -> dims.back().
/// ReLU between layers, identity after the last.
template <typename T>
class GcnEncoder {
 public:
  GcnEncoder() = default;
  GcnEncoder(const std::string& prefix, std::size_t input_dim, const std::vector<std::size_t>& dims, Rng& rng);

  std::size_t layer_count() const noexcept { return weights_.size(); }
  std::size_t input_dim() const noexcept { return weights_.empty() ? 0 : weights_.front().value.rows(); }
  std::size_t output_dim() const noexcept { return weights_.empty() ? 0 : weights_.back().value.cols(); }

  std::vector<nn::Parameter<T>>& weights() noexcept { return weights_; }
  const std::vector<nn::Parameter<T>>& weights() const noexcept { return weights_; }

  /// Puts the weights on the tape, as parameters or (frozen) constants.
  std::vector<nn::Var> bind(nn::Tape<T>& tape, bool trainable);

  /// Applies layers [first, last) to h.
  nn::Var apply(nn::Tape<T>& tape, const std::shared_ptr<const nn::CsrMatrix<T>>& propagation, nn::Var h,
                const std::vector<nn::Var>& bound, std::size_t first, std::size_t last) const;

 private:
  std::vector<nn::Parameter<T>> weights_;
};

/// Glorot-uniform initialized matrix.
template <typename T>
nn::Matrix<T> glorot(std::size_t rows, std::size_t cols, Rng& rng);

/// sum over mask of [-y log p - (1 - y) log(1 - p)] / lambda_i with p clamped
/// to [1e-7, 1 - 1e-7]. `fake_prob`, `labels` and `lambda` are indexed by
/// node; throws UsageError on an empty mask.
double news_loss(std::span<const double> fake_prob, std::span<const std::uint8_t> labels,
                 std::span<const double> lambda, std::span<const std::uint32_t> mask);

}  // namespace usdefake
