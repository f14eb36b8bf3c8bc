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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "usdefake/nn/matrix.hpp"

namespace usdefake::nn {

/// A trainable tensor. `grad` always has the shape of `value`.
template <typename T>
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Matrix<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  std::string name;
  Matrix<T> value;
  Matrix<T> grad;

  void zero_grad() { grad.fill(T(0)); }
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const noexcept { return id != UINT32_MAX; }
};

/// Reverse-mode recording of primitive operations. Each record keeps its
/// forward value and a closure that pushes its output adjoint into the
/// adjoints of its operands. backward() walks the records strictly in
/// reverse order of creation. A tape belongs to one thread.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix<T>& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// A value that receives no gradient.
  Var constant(Matrix<T> value);

  /// A leaf bound to a parameter; backward() accumulates into p.grad.
  Var parameter(Parameter<T>& p);

  /// Records an operation result. `backward` may be empty when no operand
  /// requires a gradient.
  Var record(Matrix<T> value, bool requires_grad, Backward backward);

  const Matrix<T>& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Adjoint of v after backward(); empty matrix when v never received one.
  const Matrix<T>& grad(Var v) const { return nodes_.at(v.id).grad; }

  /// Adds `g` into the adjoint of v (allocating it on first use).
  void accumulate(Var v, const Matrix<T>& g);

  /// Mutable adjoint buffer of v, zero-initialized on first use.
  Matrix<T>& grad_buffer(Var v);

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 value and propagates.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    bool requires_grad = false;
    Backward backward;
    Parameter<T>* param = nullptr;
  };
  std::vector<Node> nodes_;
};

// Primitives. Each validates shapes (DimensionError naming the operands)
// and registers its adjoint when any operand requires a gradient.
template <typename T> Var matmul(Tape<T>& t, Var a, Var b);
/// a * b^T
template <typename T> Var matmul_nt(Tape<T>& t, Var a, Var b);
template <typename T> Var spmm(Tape<T>& t, std::shared_ptr<const CsrMatrix<T>> s, Var b);
template <typename T> Var relu(Tape<T>& t, Var a);
template <typename T> Var sigmoid(Tape<T>& t, Var a);
template <typename T> Var row_softmax(Tape<T>& t, Var a);
template <typename T> Var add(Tape<T>& t, Var a, Var b);
/// a + 1 * bias, bias is 1 x cols(a)
template <typename T> Var add_row_bias(Tape<T>& t, Var a, Var bias);
template <typename T> Var scale(Tape<T>& t, Var a, T factor);
template <typename T> Var masked_row_select(Tape<T>& t, Var a, std::vector<std::uint32_t> rows);
/// Copy of a's value with no gradient path back to a.
template <typename T> Var detach(Tape<T>& t, Var a);

/// sum_k w_k * -log p(label_k | logits[rows_k]), with the class probability
/// clamped to [1e-7, 1 - 1e-7]. Softmax and log-likelihood are fused so the
/// adjoint is w * (softmax - onehot) inside the clamp range and 0 outside.
template <typename T>
Var softmax_cross_entropy(Tape<T>& t, Var logits, std::vector<std::uint32_t> rows,
                          std::vector<std::uint8_t> labels, std::vector<T> weights);

/// sum_j w_j * || target_j - pred_j ||^2 over rows j.
template <typename T>
Var weighted_row_squared_error(Tape<T>& t, Var pred, std::shared_ptr<const Matrix<T>> target,
                               std::vector<T> weights);

// Plain (tape-free) numerically stable helpers shared with inference code.
template <typename T> T stable_sigmoid(T x);
template <typename T> void softmax_rows_inplace(Matrix<T>& m);

}  // namespace usdefake::nn
