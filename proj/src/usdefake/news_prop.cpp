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

#include "usdefake/news_prop.hpp"

#include <algorithm>
#include <cmath>

#include "usdefake/error.hpp"

namespace usdefake {

template <typename T>
nn::CsrMatrix<T> build_propagation(const LayerSlice& slice, const NormalizedAdjacency& norm,
                                   const LayerCoefficients* coefficients, std::size_t* missing_alpha) {
  const Adjacency& adj = slice.layer.adjacency;
  const bool have_alpha = coefficients && coefficients->alpha.size() == norm.arc_entry.size();
  std::size_t missing = 0;
  nn::CsrMatrix<T> s;
  s.rows = s.cols = slice.size();
  s.indptr.assign(s.rows + 1, 0);
  s.indices.reserve(adj.arc_count() + s.rows);
  s.values.reserve(adj.arc_count() + s.rows);
  for (NodeId i = 0; i < slice.size(); ++i) {
    bool diag_done = false;
    auto push_diag = [&] {
      s.indices.push_back(i);
      s.values.push_back(static_cast<T>(norm.self_weight(slice.to_global[i])));
      diag_done = true;
    };
    ArcIndex local_arc = adj.arc_begin(i);
    for (NodeId v : adj.neighbors(i)) {
      if (!diag_done && v > i) push_diag();
      const ArcIndex g = slice.global_arc[local_arc++];
      double alpha = 1.0;
      if (have_alpha)
        alpha = coefficients->alpha[g];
      else
        ++missing;
      s.indices.push_back(v);
      s.values.push_back(static_cast<T>(norm.arc_weight(g) / alpha));
    }
    if (!diag_done) push_diag();
    s.indptr[i + 1] = s.indices.size();
  }
  if (missing_alpha) *missing_alpha += missing;
  return s;
}

template <typename T>
nn::CsrMatrix<T> full_propagation(const NormalizedAdjacency& norm) {
  nn::CsrMatrix<T> s;
  s.rows = norm.matrix.rows;
  s.cols = norm.matrix.cols;
  s.indptr = norm.matrix.indptr;
  s.indices = norm.matrix.indices;
  s.values.resize(norm.matrix.values.size());
  std::transform(norm.matrix.values.begin(), norm.matrix.values.end(), s.values.begin(),
                 [](double v) { return static_cast<T>(v); });
  return s;
}

template <typename T>
nn::Var gcn_forward(nn::Tape<T>& tape, const std::shared_ptr<const nn::CsrMatrix<T>>& propagation,
                    nn::Var h_prev, nn::Var weight, bool activate) {
  nn::Var transformed = nn::matmul(tape, h_prev, weight);
  nn::Var aggregated = nn::spmm(tape, propagation, transformed);
  return activate ? nn::relu(tape, aggregated) : aggregated;
}

template <typename T>
nn::Matrix<T> glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / double(rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  nn::Matrix<T> m(rows, cols);
  for (T& x : m.values()) x = static_cast<T>(u(rng));
  return m;
}

template <typename T>
GcnEncoder<T>::GcnEncoder(const std::string& prefix, std::size_t input_dim, const std::vector<std::size_t>& dims,
                          Rng& rng) {
  if (dims.empty()) throw UsageError("GCN encoder needs at least one layer");
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (in == 0 || dims[l] == 0) throw UsageError("GCN encoder dimensions must be positive");
    weights_.emplace_back(prefix + ".W" + std::to_string(l), glorot<T>(in, dims[l], rng));
    in = dims[l];
  }
}

template <typename T>
std::vector<nn::Var> GcnEncoder<T>::bind(nn::Tape<T>& tape, bool trainable) {
  std::vector<nn::Var> out;
  out.reserve(weights_.size());
  for (auto& w : weights_) out.push_back(trainable ? tape.parameter(w) : tape.constant(w.value));
  return out;
}

template <typename T>
nn::Var GcnEncoder<T>::apply(nn::Tape<T>& tape, const std::shared_ptr<const nn::CsrMatrix<T>>& propagation,
                             nn::Var h, const std::vector<nn::Var>& bound, std::size_t first,
                             std::size_t last) const {
  for (std::size_t l = first; l < last; ++l) h = gcn_forward(tape, propagation, h, bound[l], l + 1 < weights_.size());
  return h;
}

double news_loss(std::span<const double> fake_prob, std::span<const std::uint8_t> labels,
                 std::span<const double> lambda, std::span<const std::uint32_t> mask) {
  if (mask.empty()) throw UsageError("news loss: empty training mask (degenerate minibatch)");
  double total = 0.0;
  for (std::uint32_t i : mask) {
    if (i >= fake_prob.size() || i >= labels.size() || i >= lambda.size())
      throw DimensionError("news loss: mask index out of range");
    const double p = std::clamp(fake_prob[i], 1e-7, 1.0 - 1e-7);
    const double y = labels[i];
    total += (-y * std::log(p) - (1.0 - y) * std::log(1.0 - p)) / lambda[i];
  }
  return total;
}

#define USDEFAKE_INSTANTIATE(T)                                                                          \
  template nn::CsrMatrix<T> build_propagation<T>(const LayerSlice&, const NormalizedAdjacency&,          \
                                                 const LayerCoefficients*, std::size_t*);                \
  template nn::CsrMatrix<T> full_propagation<T>(const NormalizedAdjacency&);                             \
  template nn::Var gcn_forward<T>(nn::Tape<T>&, const std::shared_ptr<const nn::CsrMatrix<T>>&, nn::Var, \
                                  nn::Var, bool);                                                        \
  template nn::Matrix<T> glorot<T>(std::size_t, std::size_t, Rng&);                                      \
  template class GcnEncoder<T>;

USDEFAKE_INSTANTIATE(float)
USDEFAKE_INSTANTIATE(double)
#undef USDEFAKE_INSTANTIATE

}  // namespace usdefake
