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

#include "usdefake/nn/kernels.hpp"

namespace usdefake::nn::kernels {
namespace {

template <typename T>
inline void axpy(T alpha, const T* __restrict x, T* __restrict y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

void check(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw DimensionError(std::string(op) + ": shape mismatch " + detail);
}

}  // namespace

template <typename T>
void gemm_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  check(a.cols() == b.rows() && out.rows() == a.rows() && out.cols() == b.cols(), "gemm_nn",
        shape_string(a) + " * " + shape_string(b) + " -> " + shape_string(out));
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T* orow = out.data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T(0)) continue;
      axpy(aik, b.data() + k * n, orow, n);
    }
  }
}

template <typename T>
void gemm_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  check(a.cols() == b.cols() && out.rows() == a.rows() && out.cols() == b.rows(), "gemm_nt",
        shape_string(a) + " * " + shape_string(b) + "^T -> " + shape_string(out));
  gemm_nn(a, transpose(b), out);
}

template <typename T>
void gemm_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  check(a.rows() == b.rows() && out.rows() == a.cols() && out.cols() == b.cols(), "gemm_tn",
        shape_string(a) + "^T * " + shape_string(b) + " -> " + shape_string(out));
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const T* brow = b.data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T(0)) continue;
      axpy(aik, brow, out.data() + k * n, n);
    }
  }
}

template <typename T>
void spmm(const CsrMatrix<T>& s, const Matrix<T>& b, Matrix<T>& out) {
  check(s.cols == b.rows() && out.rows() == s.rows && out.cols() == b.cols(), "spmm",
        shape_string(s.rows, s.cols) + " * " + shape_string(b) + " -> " + shape_string(out));
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < s.rows; ++i) {
    T* orow = out.data() + i * n;
    for (std::size_t k = s.indptr[i]; k < s.indptr[i + 1]; ++k)
      axpy(s.values[k], b.data() + std::size_t(s.indices[k]) * n, orow, n);
  }
}

template <typename T>
void spmm_t(const CsrMatrix<T>& s, const Matrix<T>& b, Matrix<T>& out) {
  check(s.rows == b.rows() && out.rows() == s.cols && out.cols() == b.cols(), "spmm_t",
        shape_string(s.rows, s.cols) + "^T * " + shape_string(b) + " -> " + shape_string(out));
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < s.rows; ++i) {
    const T* brow = b.data() + i * n;
    for (std::size_t k = s.indptr[i]; k < s.indptr[i + 1]; ++k)
      axpy(s.values[k], brow, out.data() + std::size_t(s.indices[k]) * n, n);
  }
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

#define USDEFAKE_INSTANTIATE(T)                                                  \
  template void gemm_nn<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&);      \
  template void gemm_nt<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&);      \
  template void gemm_tn<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&);      \
  template void spmm<T>(const CsrMatrix<T>&, const Matrix<T>&, Matrix<T>&);      \
  template void spmm_t<T>(const CsrMatrix<T>&, const Matrix<T>&, Matrix<T>&);    \
  template Matrix<T> transpose<T>(const Matrix<T>&);

USDEFAKE_INSTANTIATE(float)
USDEFAKE_INSTANTIATE(double)
#undef USDEFAKE_INSTANTIATE

}  // namespace usdefake::nn::kernels
