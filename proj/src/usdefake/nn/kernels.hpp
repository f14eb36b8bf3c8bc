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

#include "usdefake/nn/matrix.hpp"

// Accumulating dense/sparse kernels. Every kernel adds into `out`, which must
// already have the result shape. Reductions run in a fixed order (row-major
// over the output, ascending inner index) so results are reproducible.
namespace usdefake::nn::kernels {

// out += a * b
template <typename T>
void gemm_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out);

// out += a * b^T
template <typename T>
void gemm_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out);

// out += a^T * b
template <typename T>
void gemm_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out);

// out += s * b
template <typename T>
void spmm(const CsrMatrix<T>& s, const Matrix<T>& b, Matrix<T>& out);

// out += s^T * b
template <typename T>
void spmm_t(const CsrMatrix<T>& s, const Matrix<T>& b, Matrix<T>& out);

template <typename T>
Matrix<T> transpose(const Matrix<T>& a);

}  // namespace usdefake::nn::kernels
