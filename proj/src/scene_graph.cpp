#include "cadgraph/scene_graph.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"
#include "cadgraph/scene_io.hpp"

namespace cadgraph {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "cadgraph/1";

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec_from_json(const json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; }

json box_to_json(const Box3& b) {
  return json{{"min", vec_to_json(b.min)}, {"max", vec_to_json(b.max)}};
}
Box3 box_from_json(const json& j) { return {vec_from_json(j["min"]), vec_from_json(j["max"])}; }

std::string kind_name(NodeKind k) { return k == NodeKind::Mesh ? "MESH" : "CLUSTER"; }
std::string kind_name(EdgeKind k) { return k == EdgeKind::Adjacent ? "ADJACENT" : "MEMBER_OF"; }

}  // namespace

std::vector<int> SceneGraph::adjacent_neighbors(int node_id) const {
  std::vector<int> out;
  for (const auto& e : edges) {
    if (e.kind != EdgeKind::Adjacent) continue;
    if (e.a == node_id) out.push_back(e.b);
    if (e.b == node_id) out.push_back(e.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t SceneGraph::mesh_node_count() const {
  std::size_t n = 0;
  for (const auto& [id, node] : nodes)
    if (node.kind == NodeKind::Mesh) ++n;
  return n;
}

std::size_t SceneGraph::cluster_node_count() const {
  return nodes.size() - mesh_node_count();
}

SceneGraph build_scene_graph(const std::vector<MeshGroup>& groups, const Clustering& clustering,
                             const std::vector<std::pair<int, int>>& adjacency,
                             const std::map<std::string, SemanticLabel>& labels) {
  if (clustering.labels.size() != groups.size())
    throw Error("clustering size does not match group count");

  SceneGraph graph;
  const int n = static_cast<int>(groups.size());
  for (const auto& group : groups) {
    Node node;
    node.id = group.id;
    node.kind = NodeKind::Mesh;
    node.path = group.representative_path;
    node.centroid = group.centroid;
    node.aabb = group.aabb;
    node.member_paths = group.member_paths;
    node.cluster_id = clustering.labels[group.id];
    const auto it = labels.find(group.representative_path);
    if (it != labels.end()) {
      node.group_label = it->second.group;
      node.name_label = it->second.name;
    }
    graph.nodes.emplace(node.id, std::move(node));
  }

  // One parent node per cluster, carrying the union AABB of its members.
  const auto clusters = clustering.clusters();
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].empty()) continue;
    Node node;
    node.id = n + static_cast<int>(c);
    node.kind = NodeKind::Cluster;
    node.path = "/cluster/" + std::to_string(c);
    node.cluster_id = static_cast<int>(c);
    Box3 box = Box3::empty_init();
    Vec3 sum;
    for (int member : clusters[c]) {
      const Node& m = graph.nodes.at(member);
      box.merge(m.aabb);
      sum += m.centroid;
      node.member_paths.push_back(m.path);
      graph.edges.insert({member, node.id, EdgeKind::MemberOf});
    }
    std::sort(node.member_paths.begin(), node.member_paths.end());
    node.aabb = box;
    node.centroid = sum / static_cast<double>(clusters[c].size());
    graph.nodes.emplace(node.id, std::move(node));
  }

  // Adjacency edges survive only when both endpoints share a cluster.
  for (const auto& [a, b] : adjacency) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw UnknownGroupInAdjacency("adjacency pair references unknown group id " +
                                    std::to_string(a < 0 || a >= n ? a : b));
    if (a == b) continue;
    if (clustering.labels[a] != clustering.labels[b]) continue;
    graph.edges.insert({std::min(a, b), std::max(a, b), EdgeKind::Adjacent});
  }
  return graph;
}

std::string serialize(const SceneGraph& graph) {
  json doc;
  if (!graph.extra.empty()) doc = json::parse(graph.extra);
  doc["schema"] = kSchema;
  json nodes = json::array();
  for (const auto& [id, node] : graph.nodes) {
    json jn;
    if (!node.extra.empty()) jn = json::parse(node.extra);
    jn["id"] = node.id;
    jn["kind"] = kind_name(node.kind);
    jn["path"] = node.path;
    jn["centroid"] = vec_to_json(node.centroid);
    jn["aabb"] = box_to_json(node.aabb);
    jn["cluster"] = node.cluster_id;
    if (node.group_label) jn["group_label"] = *node.group_label;
    if (node.name_label) jn["name_label"] = *node.name_label;
    jn["members"] = node.member_paths;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& e : graph.edges) edges.push_back(json::array({e.a, e.b, kind_name(e.kind)}));
  doc["edges"] = std::move(edges);
  return doc.dump();
}

SceneGraph deserialize(const std::string& bytes) {
  json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded()) throw SchemaVersionMismatch("scene graph is not valid JSON");
  if (doc.value("schema", "") != kSchema)
    throw SchemaVersionMismatch("unsupported scene graph schema '" + doc.value("schema", "") + "'");
  SceneGraph graph;
  static const std::set<std::string> known_node_keys = {
      "id",      "kind",       "path",       "centroid", "aabb",
      "cluster", "group_label", "name_label", "members"};
  for (const auto& jn : doc["nodes"]) {
    Node node;
    node.id = jn["id"].get<int>();
    node.kind = jn["kind"].get<std::string>() == "MESH" ? NodeKind::Mesh : NodeKind::Cluster;
    node.path = jn["path"].get<std::string>();
    node.centroid = vec_from_json(jn["centroid"]);
    node.aabb = box_from_json(jn["aabb"]);
    node.cluster_id = jn.value("cluster", -1);
    if (jn.contains("group_label")) node.group_label = jn["group_label"].get<std::string>();
    if (jn.contains("name_label")) node.name_label = jn["name_label"].get<std::string>();
    for (const auto& m : jn.value("members", json::array()))
      node.member_paths.push_back(m.get<std::string>());
    json extra = json::object();
    for (const auto& [key, value] : jn.items())
      if (!known_node_keys.contains(key)) extra[key] = value;
    if (!extra.empty()) node.extra = extra.dump();
    graph.nodes.emplace(node.id, std::move(node));
  }
  json doc_extra = json::object();
  for (const auto& [key, value] : doc.items())
    if (key != "schema" && key != "nodes" && key != "edges") doc_extra[key] = value;
  if (!doc_extra.empty()) graph.extra = doc_extra.dump();
  for (const auto& je : doc["edges"]) {
    Edge e;
    e.a = je[0].get<int>();
    e.b = je[1].get<int>();
    e.kind = je[2].get<std::string>() == "ADJACENT" ? EdgeKind::Adjacent : EdgeKind::MemberOf;
    graph.edges.insert(e);
  }
  return graph;
}

std::string export_dot(const SceneGraph& graph, const DotOptions& options) {
  std::ostringstream out;
  out << "graph scene {\n";
  // Nodes grouped per cluster keeps the layout readable; ids are sorted by
  // the node map already.
  if (options.cluster_subgraphs) {
    std::map<int, std::vector<const Node*>> by_cluster;
    for (const auto& [id, node] : graph.nodes)
      if (node.kind == NodeKind::Mesh) by_cluster[node.cluster_id].push_back(&node);
    for (const auto& [cluster, members] : by_cluster) {
      out << "  subgraph cluster_" << cluster << " {\n";
      for (const Node* node : members) {
        out << "    n" << node->id << " [label=\"" << node->path;
        if (options.show_labels && node->group_label) out << "\\n" << *node->group_label;
        out << "\"];\n";
      }
      out << "  }\n";
    }
    for (const auto& [id, node] : graph.nodes)
      if (node.kind == NodeKind::Cluster)
        out << "  n" << id << " [shape=box,label=\"" << node.path << "\"];\n";
  } else {
    for (const auto& [id, node] : graph.nodes) {
      out << "  n" << id << " [label=\"" << node.path;
      if (options.show_labels && node.group_label) out << "\\n" << *node.group_label;
      out << "\"];\n";
    }
  }
  for (const auto& e : graph.edges) {
    out << "  n" << e.a << " -- n" << e.b;
    if (e.kind == EdgeKind::MemberOf) out << " [style=dashed]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

Selector Selector::parse(const std::string& s) {
  const std::size_t eq = s.find('=');
  if (eq == std::string::npos) throw UnknownSelector("selector must look like key=value: " + s);
  const std::string key = s.substr(0, eq);
  const std::string value = s.substr(eq + 1);
  Selector sel{};
  sel.text = value;
  if (key == "group_label") {
    sel.kind = Kind::ByGroupLabel;
  } else if (key == "name_label") {
    sel.kind = Kind::ByNameLabel;
  } else if (key == "cluster") {
    sel.kind = Kind::ByCluster;
    sel.id = std::stoi(value);
  } else if (key == "path") {
    sel.kind = Kind::ByPathGlob;
  } else if (key == "neighbors") {
    sel.kind = Kind::NeighborsOf;
    sel.id = std::stoi(value);
  } else {
    throw UnknownSelector("unknown selector '" + key + "'");
  }
  return sel;
}

std::vector<const Node*> query(const SceneGraph& graph, const Selector& selector) {
  std::vector<const Node*> out;
  switch (selector.kind) {
    case Selector::Kind::ByGroupLabel:
      for (const auto& [id, node] : graph.nodes)
        if (node.kind == NodeKind::Mesh && node.group_label == selector.text) out.push_back(&node);
      break;
    case Selector::Kind::ByNameLabel:
      for (const auto& [id, node] : graph.nodes)
        if (node.kind == NodeKind::Mesh && node.name_label == selector.text) out.push_back(&node);
      break;
    case Selector::Kind::ByCluster:
      for (const auto& [id, node] : graph.nodes)
        if (node.kind == NodeKind::Mesh && node.cluster_id == selector.id) out.push_back(&node);
      break;
    case Selector::Kind::ByPathGlob:
      for (const auto& [id, node] : graph.nodes)
        if (node.kind == NodeKind::Mesh && glob_match(selector.text, node.path))
          out.push_back(&node);
      break;
    case Selector::Kind::NeighborsOf:
      for (int neighbor : graph.adjacent_neighbors(selector.id))
        out.push_back(&graph.nodes.at(neighbor));
      break;
  }
  return out;
}

}  // namespace cadgraph
