#include <doctest.h>

#include "cadgraph/errors.hpp"
#include "cadgraph/functional.hpp"

using namespace cadgraph;

namespace {

// Builds a mesh-node-only scene graph from paths, labels and edges; all
// nodes share one cluster, which is what the extraction operates on.
SceneGraph graph_of(const std::vector<std::pair<std::string, std::string>>& nodes,
                    const std::vector<std::pair<int, int>>& edges) {
  std::vector<MeshGroup> groups;
  std::map<std::string, SemanticLabel> labels;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    MeshGroup g;
    g.id = static_cast<int>(i);
    g.representative_path = nodes[i].first;
    g.member_paths = {nodes[i].first};
    g.centroid = {0.1 * static_cast<double>(i), 0.0, 0.0};
    g.aabb = {g.centroid, g.centroid};
    groups.push_back(std::move(g));
    if (!nodes[i].second.empty())
      labels[nodes[i].first] = {nodes[i].second, "name", Provenance::GroundTruth};
  }
  Clustering c;
  c.labels.assign(nodes.size(), 0);
  return build_scene_graph(groups, c, edges, labels);
}

const std::set<std::string> kFunctional{"Valve assembly", "Gauge", "Tank", "Pump Unit"};
const std::set<std::string> kPipe{"Pipe assembly"};

FunctionalGraph run(const SceneGraph& g, ExtractionStats* stats = nullptr) {
  auto units = identify_functional_units(g, kFunctional);
  return extract_functional_relations(g, semantic_map_of(g), kPipe, std::move(units), stats);
}

}  // namespace

TEST_CASE("two adjacent same-group nodes form one unit") {
  const SceneGraph g = graph_of({{"/v1", "Valve assembly"}, {"/v2", "Valve assembly"}}, {{0, 1}});
  const auto units = identify_functional_units(g, kFunctional);
  REQUIRE(units.size() == 1);
  CHECK(units[0].index == 1);
  CHECK(units[0].seed_nodes == std::set<int>{0, 1});
}

TEST_CASE("valve nodes separated by a pipe node form two units") {
  const SceneGraph g = graph_of(
      {{"/v1", "Valve assembly"}, {"/p", "Pipe assembly"}, {"/v2", "Valve assembly"}},
      {{0, 1}, {1, 2}});
  const auto units = identify_functional_units(g, kFunctional);
  CHECK(units.size() == 2);
}

TEST_CASE("zero functional nodes give an empty unit list") {
  const SceneGraph g = graph_of({{"/p1", "Pipe assembly"}, {"/p2", "Pipe assembly"}}, {{0, 1}});
  CHECK(identify_functional_units(g, kFunctional).empty());
}

TEST_CASE("unlabeled nodes are ignored with a warning count") {
  const SceneGraph g = graph_of({{"/v", "Valve assembly"}, {"/mystery", ""}}, {{0, 1}});
  std::size_t warnings = 0;
  const auto units = identify_functional_units(g, kFunctional, &warnings);
  CHECK(units.size() == 1);
  CHECK(warnings == 1);
}

TEST_CASE("units are ordered by smallest member path") {
  const SceneGraph g = graph_of(
      {{"/z_valve", "Valve assembly"}, {"/a_gauge", "Gauge"}, {"/m_tank", "Tank"}}, {});
  const auto units = identify_functional_units(g, kFunctional);
  REQUIRE(units.size() == 3);
  CHECK(units[0].unit_group == "Gauge");
  CHECK(units[1].unit_group == "Tank");
  CHECK(units[2].unit_group == "Valve assembly");
}

TEST_CASE("golden: pipe-VALVE-pipe-GAUGE-pipe chain yields one edge") {
  // Hand-execution: the valve claims pipes 0 and 2, the gauge claims pipe 4;
  // the edge appears where the claimed corridors meet.
  const SceneGraph g = graph_of({{"/p0", "Pipe assembly"},
                                 {"/v", "Valve assembly"},
                                 {"/p1", "Pipe assembly"},
                                 {"/g", "Gauge"},
                                 {"/p2", "Pipe assembly"}},
                                {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  ExtractionStats stats;
  const FunctionalGraph fg = run(g, &stats);
  REQUIRE(fg.units.size() == 2);
  CHECK(fg.units[0].unit_group == "Gauge");   // "/g" < "/v"
  CHECK(fg.units[1].unit_group == "Valve assembly");
  CHECK(fg.edges == std::set<std::pair<int, int>>{{1, 2}});
  CHECK(stats.outer_iterations <= 5);
}

TEST_CASE("golden: single unit with pipes everywhere has no edges") {
  const SceneGraph g = graph_of(
      {{"/p0", "Pipe assembly"}, {"/v", "Valve assembly"}, {"/p1", "Pipe assembly"}},
      {{0, 1}, {1, 2}});
  const FunctionalGraph fg = run(g);
  CHECK(fg.units.size() == 1);
  CHECK(fg.edges.empty());
  // All pipe nodes claimed.
  CHECK(fg.units[0].member_nodes == std::set<int>{0, 1, 2});
}

TEST_CASE("golden: disconnected systems never meet") {
  const SceneGraph g = graph_of({{"/a_v", "Valve assembly"},
                                 {"/a_p", "Pipe assembly"},
                                 {"/b_g", "Gauge"},
                                 {"/b_p", "Pipe assembly"}},
                                {{0, 1}, {2, 3}});
  const FunctionalGraph fg = run(g);
  CHECK(fg.units.size() == 2);
  CHECK(fg.edges.empty());
}

TEST_CASE("golden: direct valve-gauge adjacency without pipe") {
  const SceneGraph g =
      graph_of({{"/v", "Valve assembly"}, {"/g", "Gauge"}}, {{0, 1}});
  const FunctionalGraph fg = run(g);
  REQUIRE(fg.units.size() == 2);
  CHECK(fg.edges == std::set<std::pair<int, int>>{{1, 2}});
}

TEST_CASE("golden: contested pipe corridor is claimed deterministically") {
  // v1 - p0 - p1 - p2 - v2: unit 1 expands first each pass, so it claims
  // p0, then p1; unit 2 claims p2. Edge between the fronts.
  const SceneGraph g = graph_of({{"/a_v1", "Valve assembly"},
                                 {"/p0", "Pipe assembly"},
                                 {"/p1", "Pipe assembly"},
                                 {"/p2", "Pipe assembly"},
                                 {"/z_v2", "Valve assembly"}},
                                {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  ExtractionStats stats;
  const FunctionalGraph fg = run(g, &stats);
  REQUIRE(fg.units.size() == 2);
  CHECK(fg.units[0].member_nodes == std::set<int>{0, 1, 2});
  CHECK(fg.units[1].member_nodes == std::set<int>{3, 4});
  CHECK(fg.edges == std::set<std::pair<int, int>>{{1, 2}});
  CHECK(stats.outer_iterations <= 5);
}

TEST_CASE("golden: tank star links three arms") {
  // Tank center, three pipe arms, each ending in a valve.
  const SceneGraph g = graph_of({{"/tank", "Tank"},
                                 {"/arm1_p", "Pipe assembly"},
                                 {"/arm1_v", "Valve assembly"},
                                 {"/arm2_p", "Pipe assembly"},
                                 {"/arm2_v", "Valve assembly"},
                                 {"/arm3_p", "Pipe assembly"},
                                 {"/arm3_v", "Valve assembly"}},
                                {{0, 1}, {1, 2}, {0, 3}, {3, 4}, {0, 5}, {5, 6}});
  const FunctionalGraph fg = run(g);
  REQUIRE(fg.units.size() == 4);
  // Tank is unit 4 by path order ("/tank" sorts after "/arm*").
  std::size_t tank_degree = 0;
  for (const auto& [a, b] : fg.edges)
    if (a == 4 || b == 4) ++tank_degree;
  CHECK(tank_degree == 3);
  CHECK(fg.edges.size() == 3);
}

TEST_CASE("expansion claims only pipe-labeled nodes") {
  const SceneGraph g = graph_of({{"/v", "Valve assembly"},
                                 {"/support", "Structural"},
                                 {"/p", "Pipe assembly"},
                                 {"/g", "Gauge"}},
                                {{0, 1}, {0, 2}, {2, 3}, {1, 3}});
  const FunctionalGraph fg = run(g);
  REQUIRE(fg.units.size() == 2);
  // The structural support is never claimed, so the only edge goes through
  // the claimed pipe.
  for (const auto& unit : fg.units) CHECK_FALSE(unit.member_nodes.contains(1));
  CHECK(fg.edges == std::set<std::pair<int, int>>{{1, 2}});
}

TEST_CASE("termination: marked set growth bounds outer iterations") {
  // A long pipe chain off one valve: claims advance one node per pass.
  std::vector<std::pair<std::string, std::string>> nodes{{"/v", "Valve assembly"}};
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 30; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "/p%02d", i);
    nodes.push_back({buf, "Pipe assembly"});
    edges.push_back({i, i + 1});
  }
  ExtractionStats stats;
  const SceneGraph g = graph_of(nodes, edges);
  const FunctionalGraph fg = run(g, &stats);
  CHECK(fg.units.size() == 1);
  CHECK(fg.units[0].member_nodes.size() == 31);
  CHECK(stats.outer_iterations <= static_cast<int>(nodes.size()));
}

TEST_CASE("overlapping units are rejected") {
  const SceneGraph g = graph_of({{"/v", "Valve assembly"}}, {});
  FunctionalUnit u1, u2;
  u1.index = 1;
  u1.member_nodes = {0};
  u2.index = 2;
  u2.member_nodes = {0};
  CHECK_THROWS_AS(
      extract_functional_relations(g, semantic_map_of(g), kPipe, {u1, u2}, nullptr),
      OverlappingUnits);
}

TEST_CASE("functional graph is topology-only") {
  auto nodes = std::vector<std::pair<std::string, std::string>>{
      {"/v", "Valve assembly"}, {"/p", "Pipe assembly"}, {"/g", "Gauge"}};
  const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}};
  const SceneGraph g1 = graph_of(nodes, edges);
  SceneGraph g2 = g1;
  for (auto& [id, node] : g2.nodes) {
    node.centroid += Vec3{17.3, -4.2, 9.9};
    node.aabb.min += Vec3{17.3, -4.2, 9.9};
    node.aabb.max += Vec3{17.3, -4.2, 9.9};
  }
  CHECK(run(g1).same_topology(run(g2)));
}

TEST_CASE("functional graph serialization round trip and dot export") {
  const SceneGraph g = graph_of(
      {{"/v", "Valve assembly"}, {"/p", "Pipe assembly"}, {"/g", "Gauge"}}, {{0, 1}, {1, 2}});
  const FunctionalGraph fg = run(g);
  const FunctionalGraph back = functional_from_json(functional_to_json(fg));
  CHECK(back.same_topology(fg));
  CHECK(functional_to_json(back) == functional_to_json(fg));
  REQUIRE(back.units.size() == fg.units.size());
  for (std::size_t i = 0; i < fg.units.size(); ++i) {
    CHECK(back.units[i].seed_nodes == fg.units[i].seed_nodes);
    CHECK(back.units[i].member_nodes == fg.units[i].member_nodes);
  }

  const std::string dot = functional_to_dot(fg);
  CHECK(dot.find("u1") != std::string::npos);
  CHECK(dot.find("u2") != std::string::npos);
  CHECK(dot.find("--") != std::string::npos);

  // Empty graph exports valid documents.
  const FunctionalGraph empty;
  CHECK(functional_from_json(functional_to_json(empty)).units.empty());
  CHECK_FALSE(functional_to_dot(empty).empty());
}
