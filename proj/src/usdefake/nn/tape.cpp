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

#include "usdefake/nn/tape.hpp"

#include <cmath>

#include "usdefake/nn/kernels.hpp"

namespace usdefake::nn {

template <typename T>
Var Tape<T>::constant(Matrix<T> value) {
  return record(std::move(value), false, {});
}

template <typename T>
Var Tape<T>::parameter(Parameter<T>& p) {
  Var v = record(p.value, true, {});
  nodes_.back().param = &p;
  return v;
}

template <typename T>
Var Tape<T>::record(Matrix<T> value, bool requires_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Matrix<T>& Tape<T>::grad_buffer(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix<T>(n.value.rows(), n.value.cols());
  return n.grad;
}

template <typename T>
void Tape<T>::accumulate(Var v, const Matrix<T>& g) {
  Matrix<T>& buf = grad_buffer(v);
  if (!buf.same_shape(g))
    throw DimensionError("Tape::accumulate: adjoint " + shape_string(g) + " for value " +
                         shape_string(buf));
  T* d = buf.data();
  const T* s = g.data();
  for (std::size_t i = 0; i < buf.size(); ++i) d[i] += s[i];
}

template <typename T>
void Tape<T>::backward(Var loss) {
  const Node& l = nodes_.at(loss.id);
  if (l.value.rows() != 1 || l.value.cols() != 1)
    throw DimensionError("Tape::backward: loss must be 1x1, got " + shape_string(l.value));
  if (!l.requires_grad) return;
  grad_buffer(loss)(0, 0) += T(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param) {
      T* d = n.param->grad.data();
      const T* s = n.grad.data();
      for (std::size_t k = 0; k < n.grad.size(); ++k) d[k] += s[k];
    }
  }
}

namespace {

void require(bool ok, const std::string& op, const std::string& detail) {
  if (!ok) throw DimensionError(op + ": " + detail);
}

}  // namespace

template <typename T>
Var matmul(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  require(av.cols() == bv.rows(), "matmul",
          "lhs " + shape_string(av) + " incompatible with rhs " + shape_string(bv));
  Matrix<T> out(av.rows(), bv.cols());
  kernels::gemm_nn(av, bv, out);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), rg, [a, b](Tape<T>& tp, const Matrix<T>& g) {
    if (tp.requires_grad(a)) kernels::gemm_nt(g, tp.value(b), tp.grad_buffer(a));
    if (tp.requires_grad(b)) kernels::gemm_tn(tp.value(a), g, tp.grad_buffer(b));
  });
}

template <typename T>
Var matmul_nt(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  require(av.cols() == bv.cols(), "matmul_nt",
          "lhs " + shape_string(av) + " incompatible with rhs^T of " + shape_string(bv));
  Matrix<T> out(av.rows(), bv.rows());
  kernels::gemm_nt(av, bv, out);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), rg, [a, b](Tape<T>& tp, const Matrix<T>& g) {
    if (tp.requires_grad(a)) kernels::gemm_nn(g, tp.value(b), tp.grad_buffer(a));
    if (tp.requires_grad(b)) kernels::gemm_tn(g, tp.value(a), tp.grad_buffer(b));
  });
}

template <typename T>
Var spmm(Tape<T>& t, std::shared_ptr<const CsrMatrix<T>> s, Var b) {
  const auto& bv = t.value(b);
  require(s && s->cols == bv.rows(), "spmm",
          "sparse " + (s ? shape_string(s->rows, s->cols) : std::string("null")) +
              " incompatible with dense " + shape_string(bv));
  Matrix<T> out(s->rows, bv.cols());
  kernels::spmm(*s, bv, out);
  return t.record(std::move(out), t.requires_grad(b),
                  [s = std::move(s), b](Tape<T>& tp, const Matrix<T>& g) {
                    kernels::spmm_t(*s, g, tp.grad_buffer(b));
                  });
}

template <typename T>
Var relu(Tape<T>& t, Var a) {
  Matrix<T> out = t.value(a);
  for (T& x : out.values()) x = x < T(0) ? T(0) : x;  // NaN passes through
  const Var self{static_cast<std::uint32_t>(t.size())};
  return t.record(std::move(out), t.requires_grad(a), [a, self](Tape<T>& tp, const Matrix<T>& g) {
    const auto& y = tp.value(self);
    auto& d = tp.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (y.data()[i] > T(0)) d.data()[i] += g.data()[i];
  });
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
Var sigmoid(Tape<T>& t, Var a) {
  Matrix<T> out = t.value(a);
  for (T& x : out.values()) x = stable_sigmoid(x);
  const Var self{static_cast<std::uint32_t>(t.size())};
  return t.record(std::move(out), t.requires_grad(a), [a, self](Tape<T>& tp, const Matrix<T>& g) {
    const auto& y = tp.value(self);
    auto& d = tp.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T yi = y.data()[i];
      d.data()[i] += g.data()[i] * yi * (T(1) - yi);
    }
  });
}

template <typename T>
void softmax_rows_inplace(Matrix<T>& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    if (r.empty()) continue;
    const T mx = *std::max_element(r.begin(), r.end());
    T sum = 0;
    for (T& x : r) {
      x = std::exp(x - mx);
      sum += x;
    }
    for (T& x : r) x /= sum;
  }
}

template <typename T>
Var row_softmax(Tape<T>& t, Var a) {
  Matrix<T> out = t.value(a);
  softmax_rows_inplace(out);
  const Var self{static_cast<std::uint32_t>(t.size())};
  return t.record(std::move(out), t.requires_grad(a), [a, self](Tape<T>& tp, const Matrix<T>& g) {
    const auto& y = tp.value(self);
    auto& d = tp.grad_buffer(a);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      T dot = 0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) d(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

template <typename T>
Var add(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  require(av.same_shape(bv), "add", "lhs " + shape_string(av) + " vs rhs " + shape_string(bv));
  Matrix<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += bv.data()[i];
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), rg, [a, b](Tape<T>& tp, const Matrix<T>& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, g);
  });
}

template <typename T>
Var add_row_bias(Tape<T>& t, Var a, Var bias) {
  const auto& av = t.value(a);
  const auto& bv = t.value(bias);
  require(bv.rows() == 1 && bv.cols() == av.cols(), "add_row_bias",
          "matrix " + shape_string(av) + " with bias " + shape_string(bv));
  Matrix<T> out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
  const bool rg = t.requires_grad(a) || t.requires_grad(bias);
  return t.record(std::move(out), rg, [a, bias](Tape<T>& tp, const Matrix<T>& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g);
    if (tp.requires_grad(bias)) {
      auto& d = tp.grad_buffer(bias);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) d(0, j) += g(i, j);
    }
  });
}

template <typename T>
Var scale(Tape<T>& t, Var a, T factor) {
  Matrix<T> out = t.value(a);
  for (T& x : out.values()) x *= factor;
  return t.record(std::move(out), t.requires_grad(a), [a, factor](Tape<T>& tp, const Matrix<T>& g) {
    auto& d = tp.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) d.data()[i] += factor * g.data()[i];
  });
}

template <typename T>
Var masked_row_select(Tape<T>& t, Var a, std::vector<std::uint32_t> rows) {
  const auto& av = t.value(a);
  Matrix<T> out(rows.size(), av.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k] < av.rows(), "masked_row_select",
            "row " + std::to_string(rows[k]) + " out of range for " + shape_string(av));
    std::copy(av.row(rows[k]).begin(), av.row(rows[k]).end(), out.row(k).begin());
  }
  return t.record(std::move(out), t.requires_grad(a),
                  [a, rows = std::move(rows)](Tape<T>& tp, const Matrix<T>& g) {
                    auto& d = tp.grad_buffer(a);
                    for (std::size_t k = 0; k < rows.size(); ++k)
                      for (std::size_t j = 0; j < g.cols(); ++j) d(rows[k], j) += g(k, j);
                  });
}

template <typename T>
Var detach(Tape<T>& t, Var a) {
  return t.constant(t.value(a));
}

template <typename T>
Var softmax_cross_entropy(Tape<T>& t, Var logits, std::vector<std::uint32_t> rows,
                          std::vector<std::uint8_t> labels, std::vector<T> weights) {
  const auto& z = t.value(logits);
  require(rows.size() == labels.size() && rows.size() == weights.size(), "softmax_cross_entropy",
          "rows/labels/weights lengths differ");
  constexpr double kLo = 1e-7;
  constexpr double kHi = 1.0 - 1e-7;
  Matrix<T> probs(rows.size(), z.cols());
  double total = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k] < z.rows(), "softmax_cross_entropy", "row index out of range");
    require(labels[k] < z.cols(), "softmax_cross_entropy", "label out of range");
    auto zr = z.row(rows[k]);
    const T mx = *std::max_element(zr.begin(), zr.end());
    T sum = 0;
    for (std::size_t j = 0; j < zr.size(); ++j) {
      probs(k, j) = std::exp(zr[j] - mx);
      sum += probs(k, j);
    }
    for (std::size_t j = 0; j < zr.size(); ++j) probs(k, j) /= sum;
    const double p = probs(k, labels[k]);
    double logp;
    if (p < kLo)
      logp = std::log(kLo);
    else if (p > kHi)
      logp = std::log(kHi);
    else
      logp = double(zr[labels[k]] - mx) - std::log(double(sum));
    total += -double(weights[k]) * logp;
  }
  Matrix<T> out(1, 1, static_cast<T>(total));
  return t.record(std::move(out), t.requires_grad(logits),
                  [logits, rows = std::move(rows), labels = std::move(labels),
                   weights = std::move(weights), probs = std::move(probs)](Tape<T>& tp,
                                                                           const Matrix<T>& g) {
                    auto& d = tp.grad_buffer(logits);
                    const T up = g(0, 0);
                    for (std::size_t k = 0; k < rows.size(); ++k) {
                      const double p = probs(k, labels[k]);
                      if (p < kLo || p > kHi) continue;
                      for (std::size_t j = 0; j < probs.cols(); ++j) {
                        const T target = j == labels[k] ? T(1) : T(0);
                        d(rows[k], j) += up * weights[k] * (probs(k, j) - target);
                      }
                    }
                  });
}

template <typename T>
Var weighted_row_squared_error(Tape<T>& t, Var pred, std::shared_ptr<const Matrix<T>> target,
                               std::vector<T> weights) {
  const auto& p = t.value(pred);
  require(target && target->same_shape(p), "weighted_row_squared_error",
          "prediction " + shape_string(p) + " vs target " +
              (target ? shape_string(*target) : std::string("null")));
  require(weights.size() == p.rows(), "weighted_row_squared_error", "one weight per row required");
  double total = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double diff = double((*target)(i, j)) - double(p(i, j));
      row += diff * diff;
    }
    total += double(weights[i]) * row;
  }
  Matrix<T> out(1, 1, static_cast<T>(total));
  return t.record(std::move(out), t.requires_grad(pred),
                  [pred, target = std::move(target), weights = std::move(weights)](
                      Tape<T>& tp, const Matrix<T>& g) {
                    const auto& pv = tp.value(pred);
                    auto& d = tp.grad_buffer(pred);
                    const T up = g(0, 0);
                    for (std::size_t i = 0; i < pv.rows(); ++i) {
                      const T c = T(-2) * up * weights[i];
                      const T* tr = target->data() + i * pv.cols();
                      const T* pr = pv.data() + i * pv.cols();
                      T* dr = d.data() + i * pv.cols();
                      for (std::size_t j = 0; j < pv.cols(); ++j) dr[j] += c * (tr[j] - pr[j]);
                    }
                  });
}

#define USDEFAKE_INSTANTIATE(T)                                                                \
  template class Tape<T>;                                                                      \
  template Var matmul<T>(Tape<T>&, Var, Var);                                                  \
  template Var matmul_nt<T>(Tape<T>&, Var, Var);                                               \
  template Var spmm<T>(Tape<T>&, std::shared_ptr<const CsrMatrix<T>>, Var);                    \
  template Var relu<T>(Tape<T>&, Var);                                                         \
  template Var sigmoid<T>(Tape<T>&, Var);                                                      \
  template Var row_softmax<T>(Tape<T>&, Var);                                                  \
  template Var add<T>(Tape<T>&, Var, Var);                                                     \
  template Var add_row_bias<T>(Tape<T>&, Var, Var);                                            \
  template Var scale<T>(Tape<T>&, Var, T);                                                     \
  template Var masked_row_select<T>(Tape<T>&, Var, std::vector<std::uint32_t>);                \
  template Var detach<T>(Tape<T>&, Var);                                                       \
  template Var softmax_cross_entropy<T>(Tape<T>&, Var, std::vector<std::uint32_t>,             \
                                        std::vector<std::uint8_t>, std::vector<T>);            \
  template Var weighted_row_squared_error<T>(Tape<T>&, Var, std::shared_ptr<const Matrix<T>>,  \
                                             std::vector<T>);                                  \
  template T stable_sigmoid<T>(T);                                                             \
  template void softmax_rows_inplace<T>(Matrix<T>&);

USDEFAKE_INSTANTIATE(float)
USDEFAKE_INSTANTIATE(double)
#undef USDEFAKE_INSTANTIATE

}  // namespace usdefake::nn
