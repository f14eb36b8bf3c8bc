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

#include "usdefake/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "usdefake/log.hpp"

namespace usdefake::nn {
namespace {

double finite_or_throw(double v, const char* where) {
  if (!std::isfinite(v)) throw NumericError(std::string("gradient_check: non-finite loss ") + where);
  return v;
}

}  // namespace

GradCheckReport gradient_check(const LossFunction& loss, std::span<Parameter<double>* const> params,
                               const GradCheckOptions& options) {
  GradCheckReport report;
  for (auto* p : params) p->zero_grad();
  finite_or_throw(loss(true), "at the base point");

  std::mt19937_64 rng(options.seed);
  for (auto* p : params) {
    const Matrix<double> analytic = p->grad;
    std::vector<std::size_t> coords(p->value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.coordinates_per_parameter) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.coordinates_per_parameter);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      double& w = p->value.data()[idx];
      const double saved = w;
      w = saved + options.eps;
      const double up = finite_or_throw(loss(false), "at +eps");
      w = saved - options.eps;
      const double down = finite_or_throw(loss(false), "at -eps");
      w = saved;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic.data()[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
      const double err = std::abs(a - numeric) / denom;
      ++report.coordinates_checked;
      if (err > report.max_relative_error || report.coordinates_checked == 1) {
        report.max_relative_error = std::max(report.max_relative_error, err);
        if (err >= report.max_relative_error) {
          report.worst_parameter = p->name;
          report.worst_index = idx;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
    p->grad = analytic;
  }
  if (report.vacuous()) log::warn("gradient_check: no coordinates to check (vacuous pass)");
  return report;
}

}  // namespace usdefake::nn
