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

#include "usdefake/nn/adam.hpp"

#include <cmath>

namespace usdefake::nn {

template <typename T>
void Adam<T>::step(std::span<Parameter<T>* const> params) {
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(step_));
  const double c2 = 1.0 - std::pow(b2, double(step_));
  for (Parameter<T>* p : params) {
    auto [it, fresh] = moments_.try_emplace(p->name);
    AdamMoments<T>& mo = it->second;
    if (fresh || !mo.first.same_shape(p->value)) {
      mo.first = Matrix<T>(p->value.rows(), p->value.cols());
      mo.second = Matrix<T>(p->value.rows(), p->value.cols());
    }
    T* w = p->value.data();
    T* g = p->grad.data();
    T* m = mo.first.data();
    T* v = mo.second.data();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * double(m[i]) + (1.0 - b1) * gi;
      const double vi = b2 * double(v[i]) + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = config_.lr * (mi / c1) / (std::sqrt(vi / c2) + config_.eps);
      w[i] = static_cast<T>(double(w[i]) - update);
      g[i] = T(0);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace usdefake::nn
