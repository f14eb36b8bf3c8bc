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

#include "usdefake/graph.hpp"
#include "usdefake/nn/tape.hpp"

namespace usdefake {

// The user encoder is a GcnEncoder driven by the user-layer propagation
// operator; this header adds the structural decoder and its loss.

/// sigmoid(Z Z^T) over the given (sampled) users.
template <typename T>
nn::Matrix<T> decode_adjacency(const nn::Matrix<T>& z);

template <typename T>
nn::Var decode_adjacency(nn::Tape<T>& tape, nn::Var z);

/// Dense 0/1 rows of a (sub)layer adjacency; the diagonal stays 0.
template <typename T>
nn::Matrix<T> dense_adjacency(const Adjacency& adjacency);

/// sum_j || a_j - â_j ||^2 / lambda_j over all rows, diagonal included.
template <typename T>
double user_loss(const Adjacency& adjacency, const nn::Matrix<T>& decoded, std::span<const double> lambda);

template <typename T>
nn::Var user_loss(nn::Tape<T>& tape, nn::Var decoded, std::shared_ptr<const nn::Matrix<T>> target,
                  std::span<const double> lambda);

}  // namespace usdefake
