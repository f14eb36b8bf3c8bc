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

#include "usdefake/user_interact.hpp"

#include "usdefake/error.hpp"
#include "usdefake/nn/kernels.hpp"

namespace usdefake {

template <typename T>
nn::Matrix<T> decode_adjacency(const nn::Matrix<T>& z) {
  nn::Matrix<T> g(z.rows(), z.rows());
  nn::kernels::gemm_nt(z, z, g);
  for (T& x : g.values()) x = nn::stable_sigmoid(x);
  return g;
}

template <typename T>
nn::Var decode_adjacency(nn::Tape<T>& tape, nn::Var z) {
  return nn::sigmoid(tape, nn::matmul_nt(tape, z, z));
}

template <typename T>
nn::Matrix<T> dense_adjacency(const Adjacency& adjacency) {
  nn::Matrix<T> a(adjacency.node_count(), adjacency.node_count());
  for (NodeId i = 0; i < adjacency.node_count(); ++i)
    for (NodeId v : adjacency.neighbors(i)) a(i, v) = T(1);
  return a;
}

template <typename T>
double user_loss(const Adjacency& adjacency, const nn::Matrix<T>& decoded, std::span<const double> lambda) {
  const std::size_t m = adjacency.node_count();
  if (decoded.rows() != m || decoded.cols() != m || lambda.size() != m)
    throw DimensionError("user loss: decoded " + nn::shape_string(decoded) + ", lambda " +
                         std::to_string(lambda.size()) + " for " + std::to_string(m) + " users");
  double total = 0.0;
  for (NodeId j = 0; j < m; ++j) {
    auto nb = adjacency.neighbors(j);
    std::size_t k = 0;
    double row = 0.0;
    for (NodeId c = 0; c < m; ++c) {
      double a = 0.0;
      if (k < nb.size() && nb[k] == c) {
        a = 1.0;
        ++k;
      }
      const double d = a - double(decoded(j, c));
      row += d * d;
    }
    total += row / lambda[j];
  }
  return total;
}

template <typename T>
nn::Var user_loss(nn::Tape<T>& tape, nn::Var decoded, std::shared_ptr<const nn::Matrix<T>> target,
                  std::span<const double> lambda) {
  std::vector<T> weights(lambda.size());
  for (std::size_t j = 0; j < lambda.size(); ++j) weights[j] = static_cast<T>(1.0 / lambda[j]);
  return nn::weighted_row_squared_error(tape, decoded, std::move(target), std::move(weights));
}

#define USDEFAKE_INSTANTIATE(T)                                                                        \
  template nn::Matrix<T> decode_adjacency<T>(const nn::Matrix<T>&);                                    \
  template nn::Var decode_adjacency<T>(nn::Tape<T>&, nn::Var);                                         \
  template nn::Matrix<T> dense_adjacency<T>(const Adjacency&);                                         \
  template double user_loss<T>(const Adjacency&, const nn::Matrix<T>&, std::span<const double>);       \
  template nn::Var user_loss<T>(nn::Tape<T>&, nn::Var, std::shared_ptr<const nn::Matrix<T>>,           \
                                std::span<const double>);

USDEFAKE_INSTANTIATE(float)
USDEFAKE_INSTANTIATE(double)
#undef USDEFAKE_INSTANTIATE

}  // namespace usdefake
