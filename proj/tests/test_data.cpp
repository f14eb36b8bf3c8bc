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
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "support.hpp"
#include "usdefake/dataset.hpp"
#include "usdefake/error.hpp"
#include "usdefake/synth.hpp"

using namespace usdefake;
namespace fs = std::filesystem;

namespace {

const fs::path kData = USDEFAKE_TEST_DATA;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh scratch directory holding a copy of the tiny fixture.
fs::path scratch_copy(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("usdefake_test_" + tag);
  fs::remove_all(dir);
  fs::copy(kData / "tiny", dir);
  return dir;
}

void overwrite(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

SynthConfig small_synth(std::uint64_t seed = 3) {
  SynthConfig c;
  c.n_source_news = 60;
  c.n_fake_source_news = 25;
  c.n_users = 80;
  c.n_credible_users = 30;
  c.attr_dim_news = 6;
  c.attr_dim_user = 5;
  c.mean_cascade_fanout = 3.0;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("tiny fixture loads") {
  DatasetMeta meta;
  auto g = load_dataset(kData / "tiny", &meta);
  CHECK(g.source_news().size() == 4);
  CHECK(g.news().node_count() - g.source_news().size() == 4);
  CHECK(g.users().node_count() == 4);
  CHECK(meta == describe(g));
  CHECK(g.news().attribute_dim() == 3);
  CHECK(g.users().attribute_dim() == 2);
  // cascade posts inherit their source label
  CHECK(g.news().labels == std::vector<std::int8_t>{0, 1, 0, 1, 0, 1, 0, 0});
  CHECK(g.posting_users(6).size() == 1);
  CHECK(g.posting_users(6)[0] == 1);
}

TEST_CASE("politifact-shaped fixture") {
  auto meta = read_meta(kData / "politifact_shape");
  CHECK(meta.source_news == 395);
  CHECK(meta.real_sources == 180);
  CHECK(meta.fake_sources == 215);
  for (const char* rel : {"T-T", "U-T", "U-U"}) {
    REQUIRE(meta.relations.count(rel) == 1);
    CHECK(meta.relations.at(rel) > 0);
  }
  DatasetMeta loaded;
  auto g = load_dataset(kData / "politifact_shape", &loaded);
  CHECK(describe(g) == meta);
}

TEST_CASE("load errors carry file and line") {
  SUBCASE("truncated attribute row") {
    auto dir = scratch_copy("trunc");
    overwrite(dir / "news_attrs.tsv", "0\t1\t2\t3\n1\t1\t2\n");
    try {
      load_dataset(dir);
      FAIL("expected a load error");
    } catch (const LoadError& e) {
      CHECK(e.file().find("news_attrs.tsv") != std::string::npos);
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("news_attrs.tsv:2") != std::string::npos);
    }
    fs::remove_all(dir);
  }
  SUBCASE("malformed number") {
    auto dir = scratch_copy("nan");
    overwrite(dir / "user_edges.tsv", "# header\n0\t1\n2\tx\n");
    try {
      load_dataset(dir);
      FAIL("expected a load error");
    } catch (const LoadError& e) {
      CHECK(e.line() == 3);
    }
    fs::remove_all(dir);
  }
  SUBCASE("missing file") {
    auto dir = scratch_copy("missing");
    fs::remove(dir / "inter_edges.tsv");
    CHECK_THROWS_AS(load_dataset(dir), DataError);
    fs::remove_all(dir);
  }
  SUBCASE("count mismatch against meta.json") {
    auto dir = scratch_copy("count");
    auto text = slurp(dir / "meta.json");
    text.replace(text.find("\"U-U\": 2"), 8, "\"U-U\": 3");
    overwrite(dir / "meta.json", text);
    CHECK_THROWS_AS(load_dataset(dir), DataError);
    fs::remove_all(dir);
  }
  SUBCASE("node id out of range") {
    auto dir = scratch_copy("range");
    overwrite(dir / "inter_edges.tsv", "0\t4\n9\t5\n");
    CHECK_THROWS_AS(load_dataset(dir), DataError);
    fs::remove_all(dir);
  }
}

TEST_CASE("source label propagation") {
  SUBCASE("chain of three posts") {
    auto news = build_layer(std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}, {2, 3}}, nn::Matrix<float>(4, 1),
                            {1, kNoLabel, kNoLabel, kNoLabel},
                            {NodeRole::kSourceNews, NodeRole::kCascadePost, NodeRole::kCascadePost,
                             NodeRole::kCascadePost});
    auto g = propagate_source_labels(DualLayerGraph(news, testing::plain_layer(1, {}), {}));
    CHECK(g.news().labels == std::vector<std::int8_t>{1, 1, 1, 1});
  }
  SUBCASE("two disjoint cascades") {
    auto news = build_layer(std::vector<std::pair<NodeId, NodeId>>{{0, 2}, {1, 3}}, nn::Matrix<float>(4, 1),
                            {0, 1, kNoLabel, kNoLabel},
                            {NodeRole::kSourceNews, NodeRole::kSourceNews, NodeRole::kCascadePost,
                             NodeRole::kCascadePost});
    auto g = propagate_source_labels(DualLayerGraph(news, testing::plain_layer(1, {}), {}));
    CHECK(g.news().labels == std::vector<std::int8_t>{0, 1, 0, 1});
    CHECK(cascade_sources(g.news()) == std::vector<NodeId>{0, 1, 0, 1});
  }
  SUBCASE("component with two sources") {
    auto news = build_layer(std::vector<std::pair<NodeId, NodeId>>{{0, 1}}, nn::Matrix<float>(2, 1), {0, 1},
                            {NodeRole::kSourceNews, NodeRole::kSourceNews});
    CHECK_THROWS_AS(cascade_sources(news), DataError);
  }
  SUBCASE("component without a source") {
    auto news = build_layer(std::vector<std::pair<NodeId, NodeId>>{{1, 2}}, nn::Matrix<float>(3, 1), {0, kNoLabel, kNoLabel},
                            {NodeRole::kSourceNews, NodeRole::kCascadePost, NodeRole::kCascadePost});
    CHECK_THROWS_AS(cascade_sources(news), DataError);
  }
}

TEST_CASE("save and load round trip") {
  auto g = generate_synthetic(small_synth());
  fs::path dir = fs::temp_directory_path() / "usdefake_test_roundtrip";
  fs::remove_all(dir);
  save_dataset(dir, g);
  auto back = load_dataset(dir);
  CHECK(back.news().adjacency == g.news().adjacency);
  CHECK(back.users().adjacency == g.users().adjacency);
  CHECK(back.inter_edges() == g.inter_edges());
  CHECK(back.news().attributes == g.news().attributes);
  CHECK(back.users().attributes == g.users().attributes);
  CHECK(back.news().labels == g.news().labels);
  CHECK(back.news().roles == g.news().roles);
  fs::remove_all(dir);
}

TEST_CASE("synthetic generation") {
  SUBCASE("regeneration is byte-identical") {
    fs::path a = fs::temp_directory_path() / "usdefake_test_regen_a", b = fs::temp_directory_path() / "usdefake_test_regen_b";
    fs::remove_all(a);
    fs::remove_all(b);
    write_synthetic_bundle(a, small_synth(9));
    write_synthetic_bundle(b, small_synth(9));
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
      ++files;
    }
    CHECK(files == 9);
    CHECK(load_dataset(a).news().node_count() > 60);
    fs::remove_all(a);
    fs::remove_all(b);
  }
  SUBCASE("cascades are trees of bounded depth") {
    auto cfg = small_synth(4);
    auto g = generate_synthetic(cfg);
    const auto& news = g.news();
    auto src = cascade_sources(news);
    std::map<NodeId, std::size_t> nodes, arcs;
    for (NodeId i = 0; i < news.node_count(); ++i) {
      ++nodes[src[i]];
      arcs[src[i]] += news.adjacency.degree(i);
    }
    CHECK(nodes.size() == cfg.n_source_news);
    for (auto [s, n] : nodes) CHECK(arcs[s] / 2 == n - 1);
    // BFS depth from every source
    std::vector<int> depth(news.node_count(), -1);
    for (NodeId s : g.source_news()) {
      std::queue<NodeId> q;
      q.push(s);
      depth[s] = 0;
      while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (NodeId v : news.adjacency.neighbors(u))
          if (depth[v] < 0) {
            depth[v] = depth[u] + 1;
            q.push(v);
          }
      }
    }
    for (int d : depth) CHECK((d >= 0 && d <= int(cfg.cascade_depth)));
    // every source has at least one reply; every post has one poster
    for (NodeId s : g.source_news()) CHECK(news.adjacency.degree(s) >= 1);
    for (NodeId i = 0; i < news.node_count(); ++i)
      CHECK(g.posting_users(i).size() == (news.roles[i] == NodeRole::kSourceNews ? 0u : 1u));
  }
  SUBCASE("label balance, community densities and posting fidelity") {
    SynthConfig cfg = small_synth(5);
    cfg.n_users = 300;
    cfg.n_credible_users = 120;
    cfg.intra_community_prob = 0.3;
    cfg.inter_community_prob = 0.05;
    cfg.n_source_news = 400;
    cfg.n_fake_source_news = 150;
    auto g = generate_synthetic(cfg);
    auto meta = describe(g);
    CHECK(meta.fake_sources == 150);
    CHECK(meta.real_sources == 250);

    const double nc = 120, nd = 180;
    const double intra_pairs = nc * (nc - 1) / 2 + nd * (nd - 1) / 2, inter_pairs = nc * nd;
    double intra = 0, inter = 0;
    for (auto [u, v] : g.users().adjacency.edges()) ((u < 120) == (v < 120) ? intra : inter) += 1;
    auto within_3sigma = [](double count, double pairs, double p) {
      return std::abs(count - pairs * p) <= 3.0 * std::sqrt(pairs * p * (1 - p));
    };
    CHECK(within_3sigma(intra, intra_pairs, 0.3));
    CHECK(within_3sigma(inter, inter_pairs, 0.05));

    double fake_posts = 0, fake_to_doubtful = 0;
    for (const auto& e : g.inter_edges())
      if (g.news().labels[e.news] == 1) {
        ++fake_posts;
        if (e.user >= 120) ++fake_to_doubtful;
      }
    CHECK(within_3sigma(fake_to_doubtful, fake_posts, cfg.posting_fidelity));
  }
  SUBCASE("signal strength extremes") {
    SynthConfig cfg = small_synth(6);
    cfg.news_signal_strength = 1.0;
    cfg.user_signal_strength = 0.0;
    auto g = generate_synthetic(cfg);
    // news rows equal their class mean exactly
    const auto& x = g.news().attributes;
    for (NodeId i = 1; i < x.rows(); ++i) {
      bool same_row = true;
      for (std::size_t c = 0; c < x.cols(); ++c) same_row = same_row && x(i, c) == x(0, c);
      CHECK(same_row == (g.news().labels[i] == g.news().labels[0]));
    }

    cfg.news_signal_strength = 0.0;
    cfg.user_signal_strength = 1.0;
    cfg.posting_fidelity = 1.0;
    cfg.n_source_news = 400;
    cfg.n_fake_source_news = 200;
    auto h = generate_synthetic(cfg);
    // news attributes carry no class offset: class means agree within noise
    const auto& xn = h.news().attributes;
    std::vector<double> mean[2] = {std::vector<double>(xn.cols()), std::vector<double>(xn.cols())};
    double count[2] = {0, 0};
    for (NodeId i = 0; i < xn.rows(); ++i) {
      const int y = h.news().labels[i];
      count[y] += 1;
      for (std::size_t c = 0; c < xn.cols(); ++c) mean[y][c] += xn(i, c);
    }
    for (std::size_t c = 0; c < xn.cols(); ++c) {
      const double diff = mean[1][c] / count[1] - mean[0][c] / count[0];
      CHECK(std::abs(diff) < 5.0 * std::sqrt(1.0 / count[0] + 1.0 / count[1]));
    }
    // every fake post's poster is non-credible
    for (const auto& e : h.inter_edges()) CHECK((e.user >= cfg.n_credible_users) == (h.news().labels[e.news] == 1));
  }
  SUBCASE("infeasible configurations") {
    SynthConfig cfg = small_synth();
    cfg.n_credible_users = cfg.n_users + 1;
    CHECK_THROWS_AS(generate_synthetic(cfg), UsageError);
    cfg = small_synth();
    cfg.posting_fidelity = 0.4;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    CHECK_THROWS_AS(merge_json(cfg, nlohmann::json{{"n_userz", 3}}), UsageError);
    merge_json(cfg, nlohmann::json{{"n_users", 77}});
    CHECK(cfg.n_users == 77);
  }
}
