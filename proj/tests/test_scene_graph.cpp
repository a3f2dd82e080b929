#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"
#include "cadgraph/scene_graph.hpp"

using namespace cadgraph;

namespace {

MeshGroup simple_group(int id, const std::string& path, const Vec3& at) {
  MeshGroup g;
  g.id = id;
  g.representative_path = path;
  g.member_paths = {path};
  g.merged_points.keys = {voxel_key_of(at, 0.01)};
  g.merged_points.grid_pitch = 0.01;
  g.centroid = at;
  g.aabb = {at, at};
  return g;
}

Clustering clustering_of(std::vector<int> labels) {
  Clustering c;
  c.labels = std::move(labels);
  return c;
}

SceneGraph random_graph(std::mt19937& rng) {
  const int n = 3 + static_cast<int>(rng() % 8);
  std::vector<MeshGroup> groups;
  for (int i = 0; i < n; ++i)
    groups.push_back(simple_group(i, "/m" + std::to_string(i), {0.1 * i, 0.0, 0.0}));
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(rng() % 3);
  // Normalize labels to consecutive ids starting at 0.
  std::map<int, int> remap;
  for (int& l : labels) {
    if (!remap.contains(l)) remap[l] = static_cast<int>(remap.size());
    l = remap[l];
  }
  std::vector<std::pair<int, int>> adjacency;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (labels[i] == labels[j] && rng() % 2 == 0) adjacency.emplace_back(i, j);
  std::map<std::string, SemanticLabel> labels_map;
  for (int i = 0; i < n; ++i)
    if (rng() % 2 == 0)
      labels_map["/m" + std::to_string(i)] = {"Gauge", "Pressure gauge", Provenance::Model};
  return build_scene_graph(groups, clustering_of(labels), adjacency, labels_map);
}

}  // namespace

TEST_CASE("build_scene_graph assembles nodes and edges") {
  // 3 groups in 1 cluster with 2 adjacency pairs: 4 nodes, 2 ADJACENT,
  // 3 MEMBER_OF.
  std::vector<MeshGroup> groups{simple_group(0, "/a", {0, 0, 0}),
                                simple_group(1, "/b", {0.1, 0, 0}),
                                simple_group(2, "/c", {0.2, 0, 0})};
  const SceneGraph g = build_scene_graph(groups, clustering_of({0, 0, 0}), {{0, 1}, {1, 2}}, {});
  CHECK(g.nodes.size() == 4);
  CHECK(g.mesh_node_count() == 3);
  CHECK(g.cluster_node_count() == 1);
  int adjacent = 0, member = 0;
  for (const auto& e : g.edges) (e.kind == EdgeKind::Adjacent ? adjacent : member)++;
  CHECK(adjacent == 2);
  CHECK(member == 3);

  // Every mesh node has exactly one MEMBER_OF edge.
  for (const auto& [id, node] : g.nodes) {
    if (node.kind != NodeKind::Mesh) continue;
    int count = 0;
    for (const auto& e : g.edges)
      if (e.kind == EdgeKind::MemberOf && e.a == id) ++count;
    CHECK(count == 1);
  }
}

TEST_CASE("adjacency spanning two clusters is dropped") {
  std::vector<MeshGroup> groups{simple_group(0, "/a", {0, 0, 0}),
                                simple_group(1, "/b", {1, 0, 0})};
  const SceneGraph g = build_scene_graph(groups, clustering_of({0, 1}), {{0, 1}}, {});
  for (const auto& e : g.edges) CHECK(e.kind == EdgeKind::MemberOf);
}

TEST_CASE("empty clustering gives an empty graph") {
  const SceneGraph g = build_scene_graph({}, clustering_of({}), {}, {});
  CHECK(g.nodes.empty());
  CHECK(g.edges.empty());
}

TEST_CASE("unknown group in adjacency is rejected") {
  std::vector<MeshGroup> groups{simple_group(0, "/a", {0, 0, 0})};
  CHECK_THROWS_AS(build_scene_graph(groups, clustering_of({0}), {{0, 7}}, {}),
                  UnknownGroupInAdjacency);
}

TEST_CASE("labels attach by representative path, absent stays unset") {
  std::vector<MeshGroup> groups{simple_group(0, "/a", {0, 0, 0}),
                                simple_group(1, "/b", {0.1, 0, 0})};
  std::map<std::string, SemanticLabel> labels{
      {"/a", {"Valve assembly", "Gate valve", Provenance::Model}}};
  const SceneGraph g = build_scene_graph(groups, clustering_of({0, 0}), {}, labels);
  CHECK(g.nodes.at(0).group_label == "Valve assembly");
  CHECK_FALSE(g.nodes.at(1).group_label.has_value());
}

TEST_CASE("ADJACENT edge endpoints always share a cluster") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const SceneGraph g = random_graph(rng);
    // Cluster node count equals the clustering's cluster count; member
    // counts add up to the mesh node count.
    std::size_t member_total = 0;
    for (const auto& [id, node] : g.nodes)
      if (node.kind == NodeKind::Cluster) member_total += node.member_paths.size();
    CHECK(member_total == g.mesh_node_count());
    for (const auto& e : g.edges) {
      if (e.kind != EdgeKind::Adjacent) continue;
      CHECK(g.nodes.at(e.a).cluster_id == g.nodes.at(e.b).cluster_id);
      CHECK(e.a < e.b);
    }
  }
}

TEST_CASE("serialize then deserialize is the identity on nodes and edges") {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const SceneGraph g = random_graph(rng);
    const SceneGraph back = deserialize(serialize(g));
    REQUIRE(back.nodes.size() == g.nodes.size());
    CHECK(back.edges == g.edges);
    for (const auto& [id, node] : g.nodes) {
      const Node& other = back.nodes.at(id);
      CHECK(other.kind == node.kind);
      CHECK(other.path == node.path);
      CHECK(other.cluster_id == node.cluster_id);
      CHECK(other.group_label == node.group_label);
      CHECK(other.name_label == node.name_label);
      CHECK(other.member_paths == node.member_paths);
      CHECK(other.centroid == node.centroid);
    }
    // Serialized form is stable across a round trip.
    CHECK(serialize(back) == serialize(g));
  }
}

TEST_CASE("unknown JSON fields survive a round trip") {
  std::vector<MeshGroup> groups{simple_group(0, "/a", {0, 0, 0})};
  const SceneGraph g = build_scene_graph(groups, clustering_of({0}), {}, {});
  nlohmann::json doc = nlohmann::json::parse(serialize(g));
  doc["custom_top"] = {{"k", 1}};
  doc["nodes"][0]["custom_node"] = "hello";
  const SceneGraph back = deserialize(doc.dump());
  const nlohmann::json round = nlohmann::json::parse(serialize(back));
  CHECK(round["custom_top"]["k"] == 1);
  bool found = false;
  for (const auto& jn : round["nodes"])
    if (jn.contains("custom_node") && jn["custom_node"] == "hello") found = true;
  CHECK(found);
}

TEST_CASE("deserialize rejects wrong schema") {
  CHECK_THROWS_AS(deserialize("{\"schema\":\"other/9\",\"nodes\":[],\"edges\":[]}"),
                  SchemaVersionMismatch);
  CHECK_THROWS_AS(deserialize("not json"), SchemaVersionMismatch);
}

TEST_CASE("empty graph serializes to valid documents") {
  const SceneGraph g;
  const SceneGraph back = deserialize(serialize(g));
  CHECK(back.nodes.empty());
  CHECK_FALSE(export_dot(g).empty());
}

TEST_CASE("dot export is deterministic and counts nodes and edges") {
  std::vector<MeshGroup> groups{simple_group(0, "/a", {0, 0, 0}),
                                simple_group(1, "/b", {0.1, 0, 0})};
  const SceneGraph g = build_scene_graph(groups, clustering_of({0, 0}), {{0, 1}}, {});
  const std::string dot = export_dot(g);
  CHECK(dot == export_dot(g));
  // 2 mesh nodes + 1 cluster node; 1 adjacency + 2 membership edges.
  std::size_t node_count = 0;
  for (std::size_t pos = dot.find("label=\""); pos != std::string::npos;
       pos = dot.find("label=\"", pos + 1))
    ++node_count;
  CHECK(node_count == 3);
  std::size_t edge_count = 0;
  for (std::size_t pos = dot.find(" -- "); pos != std::string::npos;
       pos = dot.find(" -- ", pos + 1))
    ++edge_count;
  CHECK(edge_count == 3);
}

TEST_CASE("query selectors") {
  // Twelve gauge-labeled nodes among others, one cluster.
  std::vector<MeshGroup> groups;
  std::map<std::string, SemanticLabel> labels;
  for (int i = 0; i < 20; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "/m%02d", i);
    groups.push_back(simple_group(i, buf, {0.1 * i, 0, 0}));
    if (i < 12)
      labels[buf] = {"Gauge", "Pressure gauge", Provenance::Model};
    else
      labels[buf] = {"Pipe assembly", "Straight pipe", Provenance::Model};
  }
  std::vector<std::pair<int, int>> adjacency{{0, 1}};
  const SceneGraph g =
      build_scene_graph(groups, clustering_of(std::vector<int>(20, 0)), adjacency, labels);

  CHECK(query(g, Selector::parse("group_label=Gauge")).size() == 12);
  CHECK(query(g, Selector::parse("name_label=Straight pipe")).size() == 8);
  CHECK(query(g, Selector::parse("cluster=0")).size() == 20);
  CHECK(query(g, Selector::parse("path=/m0?")).size() == 10);
  CHECK(query(g, Selector::parse("neighbors=0")).size() == 1);
  CHECK(query(g, Selector::parse("neighbors=5")).empty());
  CHECK_THROWS_AS(Selector::parse("bogus=1"), UnknownSelector);
  CHECK_THROWS_AS(Selector::parse("no-equals"), UnknownSelector);
}
