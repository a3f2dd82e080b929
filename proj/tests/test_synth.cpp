#include <doctest.h>

#include <set>

#include "cadgraph/errors.hpp"
#include "cadgraph/geometry.hpp"
#include "cadgraph/scene_io.hpp"
#include "cadgraph/synth.hpp"
#include "support.hpp"

using namespace cadgraph;

TEST_CASE("linear chain: valve and gauge with a single edge") {
  const SynthCase c = generate(linear_chain_spec());
  REQUIRE(c.gt_functional.units.size() == 2);
  // "/run0/gauge1/dial" < "/run0/valve0/body": gauge is unit 1.
  CHECK(c.gt_functional.units[0].unit_group == "Gauge");
  CHECK(c.gt_functional.units[1].unit_group == "Valve assembly");
  CHECK(c.gt_functional.edges == std::set<std::pair<int, int>>{{1, 2}});
  CHECK(c.gt_clusters.size() == 1);

  // Every mesh is labeled and every label is in the vocabulary.
  CHECK(c.gt_labels.size() == c.scene.meshes.size());
  for (const auto& [path, label] : c.gt_labels)
    CHECK(c.vocabulary.contains(label.group, label.name));
}

TEST_CASE("two runs with a wide gap form two clusters") {
  const SynthCase c = generate(disconnected_systems_spec());
  CHECK(c.gt_clusters.size() == 2);
  CHECK(c.gt_functional.units.size() == 3);
  CHECK(c.gt_functional.edges.size() == 1);  // valve-gauge on run 0 only
}

TEST_CASE("tank star: central tank with degree three") {
  const SynthCase c = generate(tank_star_spec());
  REQUIRE(c.gt_functional.units.size() == 4);
  int tank_index = -1;
  for (const auto& u : c.gt_functional.units)
    if (u.unit_group == "Tank") tank_index = u.index;
  REQUIRE(tank_index > 0);
  std::size_t degree = 0;
  for (const auto& [a, b] : c.gt_functional.edges)
    if (a == tank_index || b == tank_index) ++degree;
  CHECK(degree == 3);
  CHECK(c.gt_clusters.size() == 1);
}

TEST_CASE("bolt cluster: fifty bolts below the volume threshold") {
  const SynthCase c = generate(bolt_cluster_spec());
  std::size_t bolts = 0, large = 0;
  for (const auto& mesh : c.scene.meshes) {
    const double v = volume_proxy(aabb(mesh), 0.01);
    if (c.gt_labels.at(mesh.path).name == "Bolt") {
      ++bolts;
      CHECK(v < 1e-6);
    } else {
      ++large;
      CHECK(v > 1e-6);
    }
  }
  CHECK(bolts == 50);
  CHECK(large == 10);
}

TEST_CASE("seed determinism: identical spec gives identical scenes") {
  const SynthCase a = generate(bolt_cluster_spec());
  const SynthCase b = generate(bolt_cluster_spec());
  CHECK(scene_to_json(a.scene) == scene_to_json(b.scene));

  // A different seed moves the jittered bolts.
  SynthSpec other = bolt_cluster_spec();
  other.seed += 1;
  const SynthCase c = generate(other);
  CHECK(scene_to_json(a.scene) != scene_to_json(c.scene));
}

TEST_CASE("direct contact case has no pipe between the two units") {
  const SynthCase c = generate(direct_contact_spec());
  REQUIRE(c.gt_functional.units.size() == 2);
  CHECK(c.gt_functional.edges == std::set<std::pair<int, int>>{{1, 2}});
}

TEST_CASE("spec JSON round trip") {
  const SynthSpec spec = tank_star_spec();
  const SynthSpec back = SynthSpec::from_json(spec.to_json());
  CHECK(back.seed == spec.seed);
  CHECK(back.runs.size() == spec.runs.size());
  CHECK(back.attachments.size() == spec.attachments.size());
  CHECK(back.runs[1].waypoints[0].y == doctest::Approx(spec.runs[1].waypoints[0].y));
  const SynthCase a = generate(spec);
  const SynthCase b = generate(back);
  CHECK(scene_to_json(a.scene) == scene_to_json(b.scene));
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec bad;
  bad.runs.push_back({{Vec3{0, 0, 0}}, 0.03});  // one waypoint
  CHECK_THROWS_AS(generate(bad), InvalidSpec);

  SynthSpec bad2 = linear_chain_spec();
  bad2.attachments[0].t = 1.5;
  CHECK_THROWS_AS(generate(bad2), InvalidSpec);

  SynthSpec bad3 = linear_chain_spec();
  bad3.attachments[0].run = 9;
  CHECK_THROWS_AS(generate(bad3), InvalidSpec);

  SynthSpec bad4 = linear_chain_spec();
  bad4.runs[0].radius = -1.0;
  CHECK_THROWS_AS(generate(bad4), InvalidSpec);

  // Overlapping spans.
  SynthSpec bad5 = linear_chain_spec();
  bad5.attachments[1].t = bad5.attachments[0].t + 0.01;
  CHECK_THROWS_AS(generate(bad5), InvalidSpec);

  // Declared gap between connected structures.
  SynthSpec bad6 = linear_chain_spec();
  bad6.gap_pairs.push_back({0, 0, 0.5});
  CHECK_THROWS_AS(generate(bad6), InvalidSpec);
}

TEST_CASE("gt units align with functional graph indexing") {
  for (const auto& [name, spec] : bundled_suite()) {
    const SynthCase c = generate(spec);
    REQUIRE(c.gt_units.size() == c.gt_functional.units.size());
    for (std::size_t i = 0; i < c.gt_units.size(); ++i) {
      CHECK(c.gt_units[i].type == c.gt_functional.units[i].unit_group);
      CHECK_FALSE(c.gt_units[i].mesh_paths.empty());
      // Unit meshes exist in the scene and carry the unit's group label.
      for (const auto& path : c.gt_units[i].mesh_paths) {
        REQUIRE(c.scene.find(path) != nullptr);
        CHECK(c.gt_labels.at(path).group == c.gt_units[i].type);
      }
    }
    // Clusters partition the scene's mesh paths.
    std::set<std::string> covered;
    std::size_t total = 0;
    for (const auto& cluster : c.gt_clusters) {
      total += cluster.size();
      covered.insert(cluster.begin(), cluster.end());
    }
    CHECK(total == covered.size());
    CHECK(covered.size() == c.scene.meshes.size());
  }
}

TEST_CASE("a bent run stays one connected cluster") {
  SynthSpec spec;
  spec.seed = 5;
  const Vec3 base{0.0037, 0.0023, 0.1041};
  spec.runs.push_back(
      {{base, base + Vec3{0.6, 0, 0}, base + Vec3{0.6, 0.6, 0}}, 0.03});
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.2});
  spec.attachments.push_back({AttachmentType::Gauge, 0, 0.8});
  const SynthCase c = generate(spec);
  CHECK(c.gt_clusters.size() == 1);
  CHECK(c.gt_functional.edges == std::set<std::pair<int, int>>{{1, 2}});
  // The elbow piece is labeled as pipe.
  bool has_elbow = false;
  for (const auto& [path, label] : c.gt_labels)
    if (label.name == "Pipe elbow") has_elbow = true;
  CHECK(has_elbow);
}

TEST_CASE("synth case files are written completely") {
  const std::string dir = testsupport::temp_dir("synthio");
  save_synth_case(generate(linear_chain_spec()), dir);
  for (const char* name : {"scene.json", "gt_labels.json", "gt_units.json",
                           "gt_functional.json", "gt_clusters.json", "vocabulary.json"}) {
    std::ifstream in(dir + "/" + name);
    CHECK(in.good());
  }
}
