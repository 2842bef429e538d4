#include "ssg/graph.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "ssg/util.hpp"

namespace ssg {

std::string_view to_string(RelationType r) {
  switch (r) {
    case RelationType::ControlFlow: return "control_flow";
    case RelationType::DataFlow: return "data_flow";
    case RelationType::Hierarchy: return "hierarchy";
  }
  return "control_flow";
}

RelationType relation_from_string(std::string_view s) {
  if (s == "control_flow") return RelationType::ControlFlow;
  if (s == "data_flow") return RelationType::DataFlow;
  if (s == "hierarchy") return RelationType::Hierarchy;
  throw GraphError("unknown relation '" + std::string(s) + "'");
}

namespace {

auto edge_key(const SceneEdge& e) {
  return std::make_tuple(e.src, e.dst, static_cast<int>(e.relation), e.label);
}

}  // namespace

void SceneGraph::add_node(SceneNode node) { nodes_.push_back(std::move(node)); }

void SceneGraph::add_edge(SceneEdge edge) {
  if (!try_add_edge(std::move(edge))) throw GraphError("duplicate edge");
}

bool SceneGraph::try_add_edge(SceneEdge edge) {
  if (!edge_keys_.insert(edge_key(edge)).second) return false;
  edges_.push_back(std::move(edge));
  return true;
}

bool SceneGraph::has_edge(const SceneEdge& edge) const { return edge_keys_.contains(edge_key(edge)); }

const SceneNode* SceneGraph::find(std::string_view id) const {
  for (const auto& n : nodes_)
    if (n.id == id) return &n;
  return nullptr;
}

SceneNode* SceneGraph::find(std::string_view id) {
  for (auto& n : nodes_)
    if (n.id == id) return &n;
  return nullptr;
}

std::size_t SceneGraph::count_edges(RelationType r) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [r](const SceneEdge& e) { return e.relation == r; }));
}

std::vector<std::string> validate(const SceneGraph& g) {
  std::vector<std::string> out;
  std::unordered_set<std::string> ids;
  for (const auto& n : g.nodes()) {
    if (n.id.empty()) out.push_back("node with empty id");
    if (n.kind.empty()) out.push_back("node " + n.id + " has empty kind");
    if (n.bbox && !n.bbox->valid()) out.push_back("node " + n.id + " has invalid bbox");
    if (!ids.insert(n.id).second) out.push_back("duplicate node id " + n.id);
  }

  std::map<std::string, std::vector<std::string>> children;
  std::map<std::string, int> parents;
  for (const auto& e : g.edges()) {
    bool ok = true;
    for (const auto* end : {&e.src, &e.dst}) {
      if (!ids.contains(*end)) {
        out.push_back("edge references unknown node " + *end);
        ok = false;
      }
      if (e.src == e.dst) break;
    }
    if (!ok || e.relation != RelationType::Hierarchy) continue;
    children[e.src].push_back(e.dst);
    if (++parents[e.dst] == 2) out.push_back("node " + e.dst + " has multiple hierarchy parents");
  }

  // Hierarchy cycles, DFS in node order.
  std::unordered_map<std::string, int> color;
  std::vector<std::string> stack;
  std::set<std::string> reported;
  std::function<void(const std::string&)> dfs = [&](const std::string& u) {
    color[u] = 1;
    stack.push_back(u);
    if (auto it = children.find(u); it != children.end()) {
      for (const auto& v : it->second) {
        if (color[v] == 1) {
          auto from = std::find(stack.begin(), stack.end(), v);
          std::vector<std::string> cycle(from, stack.end());
          std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
          std::string msg = "hierarchy cycle: ";
          for (std::size_t i = 0; i < cycle.size(); ++i) msg += (i ? "," : "") + cycle[i];
          if (reported.insert(msg).second) out.push_back(msg);
        } else if (color[v] == 0) {
          dfs(v);
        }
      }
    }
    stack.pop_back();
    color[u] = 2;
  };
  for (const auto& n : g.nodes())
    if (color[n.id] == 0) dfs(n.id);
  return out;
}

SceneGraph induced_subgraph(const SceneGraph& g, const std::set<std::string>& keep) {
  for (const auto& id : keep)
    if (!g.find(id)) throw GraphError("induced_subgraph: unknown node id " + id);
  SceneGraph out;
  for (const auto& n : g.nodes())
    if (keep.contains(n.id)) out.add_node(n);
  for (const auto& e : g.edges())
    if (keep.contains(e.src) && keep.contains(e.dst)) out.try_add_edge(e);
  out.meta() = g.meta();
  out.meta()["subgraph_of"] = g.meta().contains("source") ? g.meta().at("source") : std::string("graph");
  return out;
}

namespace {

std::string node_signature(const SceneNode& n) {
  std::string s = n.kind;
  s += '\x1f';
  s += n.content;
  s += '\x1f';
  if (n.bbox)
    s += std::to_string(n.bbox->x) + "," + std::to_string(n.bbox->y) + "," + std::to_string(n.bbox->w) +
         "," + std::to_string(n.bbox->h);
  return s;
}

std::pair<std::vector<std::string>, std::vector<std::string>> canonical_form(const SceneGraph& g) {
  std::unordered_map<std::string, std::string> sig;
  std::vector<std::string> nodes;
  for (const auto& n : g.nodes()) {
    sig[n.id] = node_signature(n);
    nodes.push_back(sig[n.id]);
  }
  std::vector<std::string> edges;
  for (const auto& e : g.edges()) {
    std::string s = sig[e.src];
    s += '\x1e';
    s += sig[e.dst];
    s += '\x1e';
    s += to_string(e.relation);
    s += '\x1e';
    s += e.label ? "L" + *e.label : std::string("-");
    edges.push_back(std::move(s));
  }
  std::sort(nodes.begin(), nodes.end());
  std::sort(edges.begin(), edges.end());
  return {std::move(nodes), std::move(edges)};
}

}  // namespace

bool isomorphic(const SceneGraph& a, const SceneGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  return canonical_form(a) == canonical_form(b);
}

std::map<std::string, std::string> hierarchy_parents(const SceneGraph& g) {
  std::map<std::string, std::string> out;
  for (const auto& e : g.edges())
    if (e.relation == RelationType::Hierarchy) out.emplace(e.dst, e.src);
  return out;
}

nlohmann::json to_json(const SceneGraph& g) {
  std::vector<const SceneNode*> nodes;
  for (const auto& n : g.nodes()) nodes.push_back(&n);
  std::stable_sort(nodes.begin(), nodes.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<const SceneEdge*> edges;
  for (const auto& e : g.edges()) edges.push_back(&e);
  std::stable_sort(edges.begin(), edges.end(), [](auto* a, auto* b) { return edge_key(*a) < edge_key(*b); });

  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto* n : nodes) {
    nlohmann::json jn{{"id", n->id}, {"kind", n->kind}, {"content", n->content}};
    if (n->bbox) jn["bbox"] = {n->bbox->x, n->bbox->y, n->bbox->w, n->bbox->h};
    j["nodes"].push_back(std::move(jn));
  }
  j["edges"] = nlohmann::json::array();
  for (const auto* e : edges) {
    nlohmann::json je{{"src", e->src}, {"dst", e->dst}, {"relation", to_string(e->relation)}};
    if (e->label) je["label"] = *e->label;
    j["edges"].push_back(std::move(je));
  }
  j["meta"] = nlohmann::json::object();
  for (const auto& [k, v] : g.meta()) j["meta"][k] = v;
  return j;
}

SceneGraph graph_from_json(const nlohmann::json& j) {
  SceneGraph g;
  try {
    for (const auto& jn : j.at("nodes")) {
      SceneNode n{jn.at("id").get<std::string>(), jn.at("kind").get<std::string>(),
                  jn.value("content", std::string{}), std::nullopt};
      if (jn.contains("bbox")) {
        const auto& b = jn.at("bbox");
        if (!b.is_array() || b.size() != 4) throw GraphError("bbox must be [x, y, w, h]");
        n.bbox = BoundingBox{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
      }
      g.add_node(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
      SceneEdge e{je.at("src").get<std::string>(), je.at("dst").get<std::string>(),
                  relation_from_string(je.at("relation").get<std::string>()), std::nullopt};
      if (je.contains("label")) e.label = je.at("label").get<std::string>();
      g.add_edge(std::move(e));
    }
    if (j.contains("meta"))
      for (const auto& [k, v] : j.at("meta").items()) g.meta()[k] = v.get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw GraphError(std::string("malformed SSG JSON: ") + ex.what());
  }
  return g;
}

std::string dump_graph(const SceneGraph& g) { return to_json(g).dump(2) + "\n"; }

SceneGraph load_graph(const std::string& path) {
  auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw GraphError(path + ": " + ex.what());
  }
  return graph_from_json(j);
}

void save_graph(const SceneGraph& g, const std::string& path) { write_file(path, dump_graph(g)); }

}  // namespace ssg
