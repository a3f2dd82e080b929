// The multi-layer scene graph: one MESH node per mesh group, one CLUSTER
// parent node per cluster, adjacency edges only inside clusters.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cadgraph/clustering.hpp"
#include "cadgraph/grouping.hpp"
#include "cadgraph/labels.hpp"

namespace cadgraph {

enum class NodeKind { Mesh, Cluster };
enum class EdgeKind { Adjacent, MemberOf };

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::Mesh;
  std::string path;  // mesh nodes: representative path; cluster nodes: synthetic
  Vec3 centroid;
  Box3 aabb;
  std::optional<std::string> group_label;
  std::optional<std::string> name_label;
  std::vector<std::string> member_paths;
  int cluster_id = -1;  // mesh nodes: owning cluster; cluster nodes: own id
  std::string extra;    // unrecognized JSON fields, preserved on round-trip
};

struct Edge {
  int a = 0;
  int b = 0;
  EdgeKind kind = EdgeKind::Adjacent;

  auto operator<=>(const Edge&) const = default;
};

struct SceneGraph {
  std::map<int, Node> nodes;
  std::set<Edge> edges;  // Adjacent edges stored with a < b
  std::string extra;     // unrecognized top-level JSON fields

  std::vector<int> adjacent_neighbors(int node_id) const;  // sorted
  std::size_t mesh_node_count() const;
  std::size_t cluster_node_count() const;
};

// Mesh nodes get ids equal to their group ids; cluster nodes follow after.
// Adjacency pairs that span two clusters are dropped. Labels are attached by
// representative path where present, left unset otherwise.
SceneGraph build_scene_graph(const std::vector<MeshGroup>& groups, const Clustering& clustering,
                             const std::vector<std::pair<int, int>>& adjacency,
                             const std::map<std::string, SemanticLabel>& labels = {});

std::string serialize(const SceneGraph& graph);
SceneGraph deserialize(const std::string& bytes);

struct DotOptions {
  bool cluster_subgraphs = true;
  bool show_labels = true;
};

std::string export_dot(const SceneGraph& graph, const DotOptions& options = {});

// Node selectors. The string form accepts "group_label=X", "name_label=X",
// "cluster=<id>", "path=<glob>", "neighbors=<node id>".
struct Selector {
  enum class Kind { ByGroupLabel, ByNameLabel, ByCluster, ByPathGlob, NeighborsOf } kind;
  std::string text;
  int id = -1;

  static Selector parse(const std::string& s);
};

std::vector<const Node*> query(const SceneGraph& graph, const Selector& selector);

}  // namespace cadgraph
