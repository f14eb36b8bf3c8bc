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

// Helpers shared by the unit tests: dense reference computations that do
// not go through the library kernels.

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "usdefake/graph.hpp"

namespace testing {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense dense_adjacency(std::size_t n, const std::vector<std::pair<usdefake::NodeId, usdefake::NodeId>>& edges) {
  Dense a = zeros(n, n);
  for (auto [u, v] : edges)
    if (u != v) a[u][v] = a[v][u] = 1.0;
  return a;
}

// D^-1/2 (A + I) D^-1/2
inline Dense dense_normalize(const Dense& a) {
  const std::size_t n = a.size();
  std::vector<double> deg(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
  Dense out = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double aij = a[i][j] + (i == j ? 1.0 : 0.0);
      out[i][j] = aij / std::sqrt(deg[i] * deg[j]);
    }
  return out;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  Dense c = zeros(a.size(), b.empty() ? 0 : b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < c[i].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

template <typename M>
Dense to_dense(const M& m) {
  Dense d = zeros(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = static_cast<double>(m(i, j));
  return d;
}

inline double max_abs_diff(const Dense& a, const Dense& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline std::vector<std::pair<usdefake::NodeId, usdefake::NodeId>> random_edges(std::size_t n, double p,
                                                                              std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<usdefake::NodeId, usdefake::NodeId>> e;
  for (usdefake::NodeId u = 0; u < n; ++u)
    for (usdefake::NodeId v = u + 1; v < n; ++v)
      if (coin(rng)) e.emplace_back(u, v);
  return e;
}

template <typename T>
usdefake::nn::Matrix<T> random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  usdefake::nn::Matrix<T> m(r, c);
  for (T& x : m.values()) x = static_cast<T>(g(rng));
  return m;
}

inline usdefake::AttributedLayer plain_layer(std::size_t n,
                                            const std::vector<std::pair<usdefake::NodeId, usdefake::NodeId>>& edges,
                                            std::size_t dim = 1) {
  return usdefake::build_layer(edges, usdefake::nn::Matrix<float>(n, dim));
}

}  // namespace testing
