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

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "support.hpp"
#include "usdefake/error.hpp"
#include "usdefake/news_prop.hpp"
#include "usdefake/nn/gradcheck.hpp"

using namespace usdefake;
using Mat = nn::Matrix<double>;
using testing::plain_layer;

namespace {

using Edges = std::vector<std::pair<NodeId, NodeId>>;

Mat identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<NodeId> all_nodes(std::size_t n) {
  std::vector<NodeId> v(n);
  for (NodeId i = 0; i < n; ++i) v[i] = i;
  return v;
}

LayerCoefficients unit_coefficients(const Adjacency& a) {
  return {std::vector<double>(a.arc_count(), 1.0), std::vector<double>(a.node_count(), 1.0)};
}

Mat forward(const nn::CsrMatrix<double>& s, const Mat& h, const Mat& w, bool activate) {
  nn::Tape<double> t;
  auto sp = std::make_shared<const nn::CsrMatrix<double>>(s);
  return t.value(gcn_forward(t, sp, t.constant(h), t.constant(w), activate));
}

}  // namespace

TEST_CASE("isolated sampled node with identity weights returns its attributes") {
  auto layer = plain_layer(1, {}, 3);
  auto norm = normalize_adjacency(layer);
  auto slice = induced_slice(layer, all_nodes(1));
  auto s = build_propagation<double>(slice, norm, nullptr);
  Mat x = Mat::from_rows({{1.0, -2.0, 3.0}});
  CHECK(forward(s, x, identity(3), false) == x);
}

TEST_CASE("full-graph slice with unit alpha equals the dense layer") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto edges = testing::random_edges(12, 0.3, rng);
    auto layer = plain_layer(12, edges, 4);
    auto norm = normalize_adjacency(layer);
    auto slice = induced_slice(layer, all_nodes(12));
    auto coef = unit_coefficients(layer.adjacency);
    std::size_t missing = 0;
    auto s = build_propagation<double>(slice, norm, &coef, &missing);
    CHECK(missing == 0);
    CHECK(testing::max_abs_diff(testing::to_dense(s.to_dense()),
                                testing::to_dense(full_propagation<double>(norm).to_dense())) == 0.0);

    Mat h = testing::random_matrix<double>(12, 4, rng);
    Mat w = testing::random_matrix<double>(4, 3, rng);
    auto oracle = testing::matmul(testing::matmul(testing::dense_normalize(testing::dense_adjacency(12, edges)),
                                                  testing::to_dense(h)),
                                  testing::to_dense(w));
    CHECK(testing::max_abs_diff(testing::to_dense(forward(s, h, w, false)), oracle) < 1e-10);

    auto relu_oracle = oracle;
    for (auto& row : relu_oracle)
      for (double& v : row) v = std::max(v, 0.0);
    CHECK(testing::max_abs_diff(testing::to_dense(forward(s, h, w, true)), relu_oracle) < 1e-10);
  }
}

TEST_CASE("two-layer encoder matches the dense oracle") {
  std::mt19937_64 g(8);
  auto edges = testing::random_edges(10, 0.3, g);
  auto layer = plain_layer(10, edges, 5);
  auto norm = normalize_adjacency(layer);
  auto sp = std::make_shared<const nn::CsrMatrix<double>>(full_propagation<double>(norm));
  Rng rng(1);
  GcnEncoder<double> enc("news", 5, {4, 3}, rng);
  CHECK(enc.layer_count() == 2);
  CHECK(enc.output_dim() == 3);
  CHECK(enc.weights()[0].name == "news.W0");
  Mat x = testing::random_matrix<double>(10, 5, g);

  nn::Tape<double> t;
  auto bound = enc.bind(t, false);
  Mat out = t.value(enc.apply(t, sp, t.constant(x), bound, 0, 2));

  auto a = testing::dense_normalize(testing::dense_adjacency(10, edges));
  auto h1 = testing::matmul(testing::matmul(a, testing::to_dense(x)), testing::to_dense(enc.weights()[0].value));
  for (auto& row : h1)
    for (double& v : row) v = std::max(v, 0.0);
  auto h2 = testing::matmul(testing::matmul(a, h1), testing::to_dense(enc.weights()[1].value));
  CHECK(testing::max_abs_diff(testing::to_dense(out), h2) < 1e-10);
}

TEST_CASE("unsampled neighbors contribute nothing") {
  // path 0 - 1, only node 0 sampled: h_0 = Ã_00 x_0 with Ã_00 = 1/2
  auto layer = plain_layer(2, {{0, 1}}, 2);
  auto norm = normalize_adjacency(layer);
  std::vector<NodeId> nodes{0};
  auto s = build_propagation<double>(induced_slice(layer, nodes), norm, nullptr);
  Mat x = Mat::from_rows({{4.0, -2.0}});
  auto h = forward(s, x, identity(2), false);
  CHECK(h(0, 0) == doctest::Approx(2.0));
  CHECK(h(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("alpha divides each arc weight") {
  auto layer = plain_layer(3, {{0, 1}, {1, 2}});
  auto norm = normalize_adjacency(layer);
  auto slice = induced_slice(layer, all_nodes(3));
  LayerCoefficients coef{{0.5, 0.25, 1.0, 2.0}, {1.0, 1.0, 1.0}};
  auto s = build_propagation<double>(slice, norm, &coef).to_dense();
  // arcs in row order 0->1, 1->0, 1->2, 2->1
  CHECK(s(0, 1) == doctest::Approx(norm.arc_weight(0) / 0.5));
  CHECK(s(1, 0) == doctest::Approx(norm.arc_weight(1) / 0.25));
  CHECK(s(1, 2) == doctest::Approx(norm.arc_weight(2)));
  CHECK(s(2, 1) == doctest::Approx(norm.arc_weight(3) / 2.0));
  for (NodeId i = 0; i < 3; ++i) CHECK(s(i, i) == doctest::Approx(norm.self_weight(i)));
}

TEST_CASE("uncovered arcs fall back to alpha 1 and are counted") {
  auto layer = plain_layer(3, {{0, 1}, {1, 2}});
  auto norm = normalize_adjacency(layer);
  auto slice = induced_slice(layer, all_nodes(3));
  LayerCoefficients stale{{0.5}, {1.0}};
  std::size_t missing = 0;
  auto s = build_propagation<double>(slice, norm, &stale, &missing);
  CHECK(missing == 4);
  CHECK(s.to_dense() == full_propagation<double>(norm).to_dense());
}

TEST_CASE("propagation on a sub-slice uses global arc coefficients") {
  std::mt19937_64 g(3);
  auto layer = plain_layer(20, testing::random_edges(20, 0.3, g));
  auto norm = normalize_adjacency(layer);
  std::vector<NodeId> nodes{1, 4, 5, 9, 12, 13, 18};
  auto slice = induced_slice(layer, nodes);
  LayerCoefficients coef;
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (std::size_t k = 0; k < layer.adjacency.arc_count(); ++k) coef.alpha.push_back(u(g));
  coef.lambda.assign(20, 1.0);
  auto s = build_propagation<double>(slice, norm, &coef).to_dense();
  for (NodeId i = 0; i < slice.size(); ++i)
    for (NodeId j = 0; j < slice.size(); ++j) {
      const NodeId gi = slice.to_global[i], gj = slice.to_global[j];
      double expect = 0.0;
      if (i == j) {
        expect = norm.self_weight(gi);
      } else if (auto arc = layer.adjacency.find_arc(gi, gj)) {
        expect = norm.arc_weight(*arc) / coef.alpha[*arc];
      }
      CHECK(s(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("news_loss examples") {
  std::vector<std::uint8_t> y{1, 1, 0};
  std::vector<std::uint32_t> first{0}, all{0, 1, 2};
  std::vector<double> one{1.0, 1.0, 1.0};

  std::vector<double> perfect{1.0, 1.0, 0.0};
  CHECK(news_loss(perfect, y, one, first) == doctest::Approx(-std::log1p(-1e-7)));
  CHECK(news_loss(perfect, y, one, first) < 1e-6);

  std::vector<double> half{0.5, 0.5, 0.5};
  CHECK(news_loss(half, y, one, first) == doctest::Approx(0.693147).epsilon(1e-6));
  std::vector<double> two{2.0, 2.0, 2.0};
  CHECK(news_loss(half, y, two, first) == doctest::Approx(0.346574).epsilon(1e-6));

  // scaling every lambda by c divides the loss by c
  std::vector<double> p{0.2, 0.7, 0.4}, lam{0.5, 1.5, 3.0}, lam3{1.5, 4.5, 9.0};
  CHECK(news_loss(p, y, lam3, all) == doctest::Approx(news_loss(p, y, lam, all) / 3.0).epsilon(1e-14));

  // clamped at the extremes, never infinite
  std::vector<double> wrong{0.0, 0.0, 1.0};
  CHECK(std::isfinite(news_loss(wrong, y, one, all)));

  std::vector<std::uint32_t> none;
  CHECK_THROWS_AS(news_loss(half, y, one, none), UsageError);
}

TEST_CASE("news loss gradient through a two-layer encoder passes finite differences") {
  std::mt19937_64 g(12);
  auto layer = plain_layer(9, testing::random_edges(9, 0.35, g), 4);
  auto norm = normalize_adjacency(layer);
  std::vector<NodeId> nodes{0, 2, 3, 5, 6, 8};
  auto slice = induced_slice(layer, nodes);
  LayerCoefficients coef;
  std::uniform_real_distribution<double> u(0.3, 1.0);
  for (std::size_t k = 0; k < layer.adjacency.arc_count(); ++k) coef.alpha.push_back(u(g));
  auto sp = std::make_shared<const nn::CsrMatrix<double>>(build_propagation<double>(slice, norm, &coef));

  Rng rng(5);
  GcnEncoder<double> enc("news", 4, {5, 3}, rng);
  nn::Parameter<double> wf("classifier.W", testing::random_matrix<double>(3, 2, g));
  Mat x = testing::random_matrix<double>(6, 4, g);
  std::vector<double> inv_lambda{0.5, 1.0, 2.0, 0.25};

  auto loss = [&](bool with_backward) {
    nn::Tape<double> t;
    auto bound = enc.bind(t, true);
    nn::Var h = enc.apply(t, sp, t.constant(x), bound, 0, 2);
    nn::Var logits = nn::matmul(t, h, t.parameter(wf));
    nn::Var l = nn::softmax_cross_entropy(t, logits, {0, 1, 3, 5}, {1, 0, 1, 0}, inv_lambda);
    if (with_backward) t.backward(l);
    return t.value(l)(0, 0);
  };
  std::vector<nn::Parameter<double>*> params{&enc.weights()[0], &enc.weights()[1], &wf};
  auto report = nn::gradient_check(loss, params);
  CHECK(report.coordinates_checked == 20 + 15 + 6);
  CHECK(report.max_relative_error < 1e-5);
}

TEST_CASE("dimension mismatch is an error") {
  auto layer = plain_layer(3, {{0, 1}});
  auto s = full_propagation<double>(normalize_adjacency(layer));
  CHECK_THROWS_AS(forward(s, Mat(3, 2), Mat(3, 2), false), DimensionError);
  CHECK_THROWS_AS(forward(s, Mat(4, 2), Mat(2, 2), false), DimensionError);
}
