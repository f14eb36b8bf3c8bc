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

#include "usdefake/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "usdefake/error.hpp"

namespace usdefake {

namespace fs = std::filesystem;

namespace {

// Yields the fields of every non-blank, non-comment line of a TSV file.
class TsvReader {
 public:
  explicit TsvReader(const fs::path& path) : name_(path.filename().string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(name_, 0, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text_ = ss.str();
  }

  bool next(std::vector<std::string_view>& fields) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      std::string_view line(text_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      fields.clear();
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && (line[i] == '\t' || line[i] == ' ')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != '\t' && line[j] != ' ') ++j;
        if (j > i) fields.push_back(line.substr(i, j - i));
        i = j;
      }
      if (fields.empty() || fields.front().front() == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw LoadError(name_, line_, what); }

  template <typename U>
  U number(std::string_view field, const char* what) const {
    U v{};
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
      fail(std::string("malformed ") + what + " '" + std::string(field) + "'");
    return v;
  }

  NodeId id(std::string_view field, std::size_t limit, const char* what) const {
    const auto v = number<std::uint64_t>(field, what);
    if (v >= limit) fail(std::string(what) + " " + std::to_string(v) + " out of range [0, " + std::to_string(limit) + ")");
    return static_cast<NodeId>(v);
  }

  std::size_t line() const noexcept { return line_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::pair<NodeId, NodeId>> read_edges(const fs::path& path, std::size_t n_a, std::size_t n_b,
                                                  const char* a, const char* b) {
  TsvReader r(path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    if (f.size() != 2) r.fail("expected 2 fields, found " + std::to_string(f.size()));
    edges.emplace_back(r.id(f[0], n_a, a), r.id(f[1], n_b, b));
  }
  return edges;
}

nn::Matrix<float> read_attributes(const fs::path& path, std::size_t n, std::size_t d) {
  TsvReader r(path);
  nn::Matrix<float> x(n, d);
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::string_view> f;
  while (r.next(f)) {
    if (f.size() != d + 1)
      r.fail("expected node id and " + std::to_string(d) + " values, found " + std::to_string(f.size()) + " fields");
    const NodeId id = r.id(f[0], n, "node id");
    if (seen[id]) r.fail("duplicate attribute row for node " + std::to_string(id));
    seen[id] = 1;
    for (std::size_t c = 0; c < d; ++c) {
      const float v = r.number<float>(f[c + 1], "attribute value");
      if (!std::isfinite(v)) r.fail("non-finite attribute value");
      x(id, c) = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw LoadError(r.name(), 0, "no attribute row for node " + std::to_string(i));
  return x;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.filename().string(), 0, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.filename().string(), 0, e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
}

void append_uint(std::string& s, std::uint64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, p);
}

void append_float(std::string& s, float v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, p);
}

std::string edges_tsv(const Adjacency& adj) {
  std::string s;
  for (auto [u, v] : adj.edges()) {
    append_uint(s, u);
    s += '\t';
    append_uint(s, v);
    s += '\n';
  }
  return s;
}

std::string attrs_tsv(const nn::Matrix<float>& x) {
  std::string s;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    append_uint(s, i);
    for (float v : x.row(i)) {
      s += '\t';
      append_float(s, v);
    }
    s += '\n';
  }
  return s;
}

void check_count(const char* what, std::size_t meta, std::size_t actual) {
  if (meta != actual)
    throw LoadError("meta.json", 0,
                    std::string("count mismatch for ") + what + ": meta says " + std::to_string(meta) +
                        ", files hold " + std::to_string(actual));
}

}  // namespace

nlohmann::json to_json(const DatasetMeta& m) {
  return {{"format_version", kDatasetFormatVersion},
          {"news_nodes", m.news_nodes},
          {"user_nodes", m.user_nodes},
          {"d_t", m.news_attr_dim},
          {"d_u", m.user_attr_dim},
          {"source_news", m.source_news},
          {"labels", {{"real", m.real_sources}, {"fake", m.fake_sources}}},
          {"relations", m.relations}};
}

DatasetMeta meta_from_json(const nlohmann::json& j) {
  try {
    DatasetMeta m;
    const int version = j.value("format_version", kDatasetFormatVersion);
    if (version != kDatasetFormatVersion)
      throw LoadError("meta.json", 0, "unsupported format_version " + std::to_string(version));
    m.news_nodes = j.at("news_nodes").get<std::size_t>();
    m.user_nodes = j.at("user_nodes").get<std::size_t>();
    m.news_attr_dim = j.at("d_t").get<std::size_t>();
    m.user_attr_dim = j.at("d_u").get<std::size_t>();
    m.source_news = j.at("source_news").get<std::size_t>();
    if (j.contains("labels")) {
      m.real_sources = j["labels"].value("real", std::size_t{0});
      m.fake_sources = j["labels"].value("fake", std::size_t{0});
    }
    m.relations = j.at("relations").get<std::map<std::string, std::size_t>>();
    for (const char* key : {"T-T", "U-T", "U-U"})
      if (!m.relations.count(key)) throw LoadError("meta.json", 0, std::string("relation count '") + key + "' missing");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("meta.json", 0, e.what());
  }
}

DatasetMeta describe(const DualLayerGraph& graph) {
  DatasetMeta m;
  m.news_nodes = graph.news().node_count();
  m.user_nodes = graph.users().node_count();
  m.news_attr_dim = graph.news().attribute_dim();
  m.user_attr_dim = graph.users().attribute_dim();
  for (NodeId s : graph.source_news()) {
    ++m.source_news;
    if (graph.news().has_labels()) {
      if (graph.news().labels[s] == 0) ++m.real_sources;
      if (graph.news().labels[s] == 1) ++m.fake_sources;
    }
  }
  m.relations = {{"T-T", graph.news().adjacency.edge_count()},
                 {"U-T", graph.inter_edges().size()},
                 {"U-U", graph.users().adjacency.edge_count()}};
  return m;
}

DatasetMeta read_meta(const fs::path& dir) { return meta_from_json(read_json(dir / "meta.json")); }

DualLayerGraph load_dataset(const fs::path& dir, DatasetMeta* meta_out) {
  if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
  const DatasetMeta meta = read_meta(dir);
  const std::size_t nt = meta.news_nodes, nu = meta.user_nodes;

  auto news_edges = read_edges(dir / "news_edges.tsv", nt, nt, "news node", "news node");
  auto user_edges = read_edges(dir / "user_edges.tsv", nu, nu, "user node", "user node");
  auto inter_pairs = read_edges(dir / "inter_edges.tsv", nu, nt, "user node", "news node");
  auto news_x = read_attributes(dir / "news_attrs.tsv", nt, meta.news_attr_dim);
  auto user_x = read_attributes(dir / "user_attrs.tsv", nu, meta.user_attr_dim);

  std::vector<std::int8_t> labels(nt, kNoLabel);
  {
    TsvReader r(dir / "news_labels.tsv");
    std::vector<std::string_view> f;
    while (r.next(f)) {
      if (f.size() != 2) r.fail("expected node id and label");
      const NodeId id = r.id(f[0], nt, "news node");
      if (f[1] != "0" && f[1] != "1") r.fail("label must be 0 or 1, got '" + std::string(f[1]) + "'");
      labels[id] = static_cast<std::int8_t>(f[1][0] - '0');
    }
  }
  std::vector<NodeRole> roles(nt, NodeRole::kCascadePost);
  {
    std::vector<std::uint8_t> seen(nt, 0);
    TsvReader r(dir / "news_roles.tsv");
    std::vector<std::string_view> f;
    while (r.next(f)) {
      if (f.size() != 2) r.fail("expected node id and role");
      const NodeId id = r.id(f[0], nt, "news node");
      if (f[1] == "source")
        roles[id] = NodeRole::kSourceNews;
      else if (f[1] == "cascade")
        roles[id] = NodeRole::kCascadePost;
      else
        r.fail("role must be 'source' or 'cascade', got '" + std::string(f[1]) + "'");
      seen[id] = 1;
    }
    for (std::size_t i = 0; i < nt; ++i)
      if (!seen[i]) throw LoadError(r.name(), 0, "no role for news node " + std::to_string(i));
  }

  std::vector<NodeRole> user_roles(nu, NodeRole::kUser);
  std::vector<InterEdge> inter;
  inter.reserve(inter_pairs.size());
  for (auto [u, n] : inter_pairs) inter.push_back({u, n});
  DualLayerGraph graph(build_layer(news_edges, std::move(news_x), std::move(labels), std::move(roles)),
                       build_layer(user_edges, std::move(user_x), {}, std::move(user_roles)), std::move(inter));
  graph = propagate_source_labels(std::move(graph));

  const DatasetMeta actual = describe(graph);
  check_count("source_news", meta.source_news, actual.source_news);
  for (const auto& [key, n] : actual.relations) check_count(key.c_str(), meta.relations.at(key), n);
  if (meta.real_sources + meta.fake_sources) {
    check_count("labels.real", meta.real_sources, actual.real_sources);
    check_count("labels.fake", meta.fake_sources, actual.fake_sources);
  }
  if (meta_out) *meta_out = meta;
  return graph;
}

void save_dataset(const fs::path& dir, const DualLayerGraph& graph, const nlohmann::json& manifest) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  const auto& news = graph.news();
  write_file(dir / "news_edges.tsv", edges_tsv(news.adjacency));
  write_file(dir / "user_edges.tsv", edges_tsv(graph.users().adjacency));
  std::string s;
  for (const InterEdge& e : graph.inter_edges()) {
    append_uint(s, e.user);
    s += '\t';
    append_uint(s, e.news);
    s += '\n';
  }
  write_file(dir / "inter_edges.tsv", s);
  write_file(dir / "news_attrs.tsv", attrs_tsv(news.attributes));
  write_file(dir / "user_attrs.tsv", attrs_tsv(graph.users().attributes));
  s.clear();
  for (NodeId i = 0; i < news.node_count(); ++i) {
    if (!news.has_labels() || news.labels[i] == kNoLabel) continue;
    append_uint(s, i);
    s += news.labels[i] ? "\t1\n" : "\t0\n";
  }
  write_file(dir / "news_labels.tsv", s);
  s.clear();
  for (NodeId i = 0; i < news.node_count(); ++i) {
    append_uint(s, i);
    const bool source = news.roles.empty() || news.roles[i] == NodeRole::kSourceNews;
    s += source ? "\tsource\n" : "\tcascade\n";
  }
  write_file(dir / "news_roles.tsv", s);
  write_file(dir / "meta.json", to_json(describe(graph)).dump(2) + "\n");
  if (!manifest.is_null()) write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<NodeId> cascade_sources(const AttributedLayer& news) {
  const std::size_t n = news.node_count();
  constexpr NodeId kUnset = UINT32_MAX;
  std::vector<NodeId> source(n, kUnset);
  std::vector<NodeId> stack, members;
  for (NodeId start = 0; start < n; ++start) {
    if (source[start] != kUnset) continue;
    members.clear();
    stack.assign(1, start);
    source[start] = start;
    NodeId found = kUnset;
    std::size_t count = 0;
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      members.push_back(u);
      const bool is_source = news.roles.empty() || news.roles[u] == NodeRole::kSourceNews;
      if (is_source) {
        ++count;
        found = std::min(found, u);
      }
      for (NodeId v : news.adjacency.neighbors(u))
        if (source[v] == kUnset) {
          source[v] = start;
          stack.push_back(v);
        }
    }
    if (count != 1) {
      std::sort(members.begin(), members.end());
      throw DataError("news component containing node " + std::to_string(members.front()) + " has " +
                      std::to_string(count) + " source news (expected exactly 1)");
    }
    for (NodeId u : members) source[u] = found;
  }
  return source;
}

DualLayerGraph propagate_source_labels(DualLayerGraph graph) {
  AttributedLayer& news = graph.mutable_news();
  const auto source = cascade_sources(news);
  if (news.labels.empty()) return graph;
  for (NodeId i = 0; i < news.node_count(); ++i) news.labels[i] = news.labels[source[i]];
  return graph;
}

}  // namespace usdefake
