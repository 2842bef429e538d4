// Semantic scene graph: typed nodes, typed directed edges, structural queries.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

namespace ssg {

enum class RelationType { ControlFlow, DataFlow, Hierarchy };

std::string_view to_string(RelationType r);
/// Parses "control_flow" | "data_flow" | "hierarchy".
RelationType relation_from_string(std::string_view s);

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  bool valid() const { return x >= 0 && y >= 0 && w >= 1 && h >= 1; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  bool contains(double px, double py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  auto operator<=>(const BoundingBox&) const = default;
};

struct SceneNode {
  std::string id;
  std::string kind;
  std::string content;
  std::optional<BoundingBox> bbox;

  bool operator==(const SceneNode&) const = default;
};

struct SceneEdge {
  std::string src;
  std::string dst;
  RelationType relation = RelationType::ControlFlow;
  std::optional<std::string> label;

  bool operator==(const SceneEdge&) const = default;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Directed graph of scene elements. Cycles are allowed among control-flow
/// and data-flow edges; hierarchy edges must form a forest (see validate()).
///
/// Insertion does not check referential integrity so that malformed graphs
/// can be represented and reported by validate(); duplicate edges are
/// rejected immediately.
class SceneGraph {
 public:
  using Meta = std::map<std::string, std::string>;

  SceneGraph() = default;

  void add_node(SceneNode node);
  /// Throws GraphError on a duplicate (src, dst, relation, label).
  void add_edge(SceneEdge edge);
  /// Returns false (and does nothing) if the edge already exists.
  bool try_add_edge(SceneEdge edge);
  bool has_edge(const SceneEdge& edge) const;

  const std::vector<SceneNode>& nodes() const { return nodes_; }
  const std::vector<SceneEdge>& edges() const { return edges_; }
  const Meta& meta() const { return meta_; }
  Meta& meta() { return meta_; }

  const SceneNode* find(std::string_view id) const;
  SceneNode* find(std::string_view id);
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t count_edges(RelationType r) const;

 private:
  std::vector<SceneNode> nodes_;
  std::vector<SceneEdge> edges_;
  std::set<std::tuple<std::string, std::string, int, std::optional<std::string>>> edge_keys_;
  Meta meta_;
};

/// Every invariant violation, empty iff the graph is valid.
std::vector<std::string> validate(const SceneGraph& g);

/// Subgraph with exactly the nodes in `keep` and the edges between them.
SceneGraph induced_subgraph(const SceneGraph& g, const std::set<std::string>& keep);

/// Canonical-form isomorphism: sorted node signatures (kind, content, bbox)
/// and sorted edge signatures (endpoint signatures, relation, label) must
/// match. Exact whenever node signatures are distinct.
bool isomorphic(const SceneGraph& a, const SceneGraph& b);

/// child id -> parent id over hierarchy edges (first parent wins).
std::map<std::string, std::string> hierarchy_parents(const SceneGraph& g);

// Canonical on-disk JSON form; arrays sorted for byte-stable output.
nlohmann::json to_json(const SceneGraph& g);
SceneGraph graph_from_json(const nlohmann::json& j);
std::string dump_graph(const SceneGraph& g);
SceneGraph load_graph(const std::string& path);
void save_graph(const SceneGraph& g, const std::string& path);

}  // namespace ssg
