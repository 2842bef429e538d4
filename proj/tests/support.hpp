// Shared generators and paths for the test binaries.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "ssg/graph.hpp"
#include "ssg/util.hpp"

namespace testing {

inline std::filesystem::path env_path(const char* var, const char* fallback) {
  const char* v = std::getenv(var);
  return v && *v ? v : fallback;
}
inline std::filesystem::path fixtures() { return env_path("SSG_FIXTURES", "tests/fixtures"); }
inline std::filesystem::path templates() { return env_path("SSG_TEMPLATES", "templates"); }
inline std::string ssg_exe() { return env_path("SSG_EXE", "ssg").string(); }

inline std::size_t draw(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

// Content drawn from an alphabet that includes every character the Mermaid
// form has to escape.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::string alphabet = "abcxyz019 _=+<>;(){}\"|#@,.\n\r&-*/";
  std::string s;
  const auto n = draw(rng, max_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[draw(rng, alphabet.size())];
  return s;
}

struct GraphGen {
  std::size_t max_nodes = 12;
  std::size_t max_edges = 24;
  bool bboxes = true;
};

/// Valid graph: hierarchy edges only point from lower to higher index with at
/// most one parent each, so they always form a forest. Node contents are
/// unique (index prefix), which makes canonical isomorphism exact.
inline ssg::SceneGraph random_graph(std::mt19937_64& rng, const GraphGen& opt = {}) {
  static const char* kinds[] = {"block", "branch", "div", "p", "text", "entry|x", "k#1"};
  ssg::SceneGraph g;
  const auto n = draw(rng, opt.max_nodes + 1);
  for (std::size_t i = 0; i < n; ++i) {
    ssg::SceneNode node{"v" + std::to_string(i) + random_text(rng, 3), kinds[draw(rng, 7)],
                        std::to_string(i) + ":" + random_text(rng, 12), std::nullopt};
    if (opt.bboxes && draw(rng, 2))
      node.bbox = ssg::BoundingBox{int(draw(rng, 600)), int(draw(rng, 400)), 1 + int(draw(rng, 80)), 1 + int(draw(rng, 60))};
    g.add_node(std::move(node));
  }
  if (n == 0) return g;
  std::vector<bool> has_parent(n, false);
  const auto m = draw(rng, opt.max_edges + 1);
  for (std::size_t k = 0; k < m; ++k) {
    auto a = draw(rng, n), b = draw(rng, n);
    const auto rel = static_cast<ssg::RelationType>(draw(rng, 3));
    if (rel == ssg::RelationType::Hierarchy) {
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (has_parent[b]) continue;
      has_parent[b] = true;
    }
    std::optional<std::string> label;
    const auto l = draw(rng, 4);
    if (l == 1) label = "true";
    if (l == 2) label = "false";
    if (l == 3) label = random_text(rng, 4);
    g.try_add_edge({g.nodes()[a].id, g.nodes()[b].id, rel, label});
  }
  return g;
}

/// Same graph with node ids renamed and node/edge order shuffled.
inline ssg::SceneGraph relabel_shuffle(const ssg::SceneGraph& g, std::mt19937_64& rng) {
  std::vector<std::size_t> order(g.node_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[draw(rng, i)]);
  std::map<std::string, std::string> rename;
  ssg::SceneGraph out;
  for (auto i : order) {
    auto node = g.nodes()[i];
    rename[node.id] = "r" + std::to_string(rng() % 1000000) + "_" + std::to_string(i);
    node.id = rename[node.id];
    out.add_node(std::move(node));
  }
  auto edges = g.edges();
  for (std::size_t i = edges.size(); i > 1; --i) std::swap(edges[i - 1], edges[draw(rng, i)]);
  for (auto e : edges) {
    e.src = rename.at(e.src);
    e.dst = rename.at(e.dst);
    out.add_edge(std::move(e));
  }
  return out;
}

// Reverses the first k edge lines (in `order`) of a serialized document.
inline std::string flip_edges(const std::string& doc, const std::vector<std::size_t>& order, std::size_t k) {
  auto lines = ssg::split_lines(doc);
  std::vector<std::size_t> edge_lines;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].find("[\"") == std::string::npos && lines[i].find(" n") != std::string::npos && i > 0)
      edge_lines.push_back(i);
  for (std::size_t j = 0; j < k && j < order.size(); ++j) {
    auto& l = lines[edge_lines[order[j]]];
    const auto first = l.find_first_not_of(' ');
    const auto src_end = l.find(' ', first);
    const auto dst_start = l.rfind(' ') + 1;
    l = l.substr(0, first) + l.substr(dst_start) + l.substr(src_end, dst_start - src_end) + l.substr(first, src_end - first);
  }
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace testing
