#include <doctest.h>

#include <random>
#include <set>

#include "cadgraph/errors.hpp"
#include "cadgraph/geometry.hpp"
#include "support.hpp"

using namespace cadgraph;
using testsupport::triangle_mesh;

TEST_CASE("voxelize_vertices snaps to voxel centers") {
  const Mesh m = triangle_mesh("/m", {{0.004, 0.004, 0.004}}, {});
  const PointSet ps = voxelize_vertices(m, 0.01);
  REQUIRE(ps.size() == 1);
  const Vec3 p = ps.point(0);
  CHECK(p.x == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(p.z == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("voxelize_vertices deduplicates within a voxel") {
  const Mesh m = triangle_mesh("/m", {{0.001, 0.0, 0.0}, {0.009, 0.0, 0.0}}, {});
  CHECK(voxelize_vertices(m, 0.01).size() == 1);
}

TEST_CASE("voxelize_vertices handles negative coordinates") {
  const Mesh m = triangle_mesh("/m", {{-0.004, -0.014, 0.0}}, {});
  const PointSet ps = voxelize_vertices(m, 0.01);
  CHECK(ps.point(0).x == doctest::Approx(-0.005).epsilon(1e-12));
  CHECK(ps.point(0).y == doctest::Approx(-0.015).epsilon(1e-12));
}

TEST_CASE("voxelize_vertices errors on an empty mesh") {
  CHECK_THROWS_AS(voxelize_vertices(Mesh{}, 0.01), EmptyMesh);
}

TEST_CASE("random points in a small cube occupy at most 8 voxels") {
  // Brute-force voxel-count oracle on 1000 points in a 0.02 m cube.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 0.02);
  Mesh m;
  m.path = "/cube";
  std::set<std::array<long long, 3>> oracle;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v{u(rng), u(rng), u(rng)};
    m.vertices.push_back(v);
    oracle.insert({static_cast<long long>(std::floor(v.x / 0.01)),
                   static_cast<long long>(std::floor(v.y / 0.01)),
                   static_cast<long long>(std::floor(v.z / 0.01))});
  }
  const PointSet ps = voxelize_vertices(m, 0.01);
  CHECK(ps.size() == oracle.size());
  CHECK(ps.size() <= 8);
}

TEST_CASE("voxelization is idempotent at equal pitch") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Mesh m;
    m.path = "/r";
    for (int i = 0; i < 40; ++i) m.vertices.push_back({u(rng), u(rng), u(rng)});
    const PointSet once = voxelize_vertices(m, 0.01);
    Mesh again;
    again.path = "/r";
    again.vertices = once.points();
    const PointSet twice = voxelize_vertices(again, 0.01);
    CHECK(once.keys == twice.keys);
  }
}

TEST_CASE("edge sampling emits ceil(L/spacing)+1 points per edge") {
  // One edge of length 0.05: 6 points before snapping.
  const Vec3 a{0.0012, 0.0034, 0.0}, b{0.0512, 0.0034, 0.0};
  std::set<std::array<long long, 3>> oracle;
  const int steps = static_cast<int>(std::ceil(0.05 / 0.01));
  REQUIRE(steps + 1 == 6);
  for (int i = 0; i <= steps; ++i) {
    const Vec3 p = lerp(a, b, static_cast<double>(i) / steps);
    oracle.insert({static_cast<long long>(std::floor(p.x / 0.01)),
                   static_cast<long long>(std::floor(p.y / 0.01)),
                   static_cast<long long>(std::floor(p.z / 0.01))});
  }
  // Degenerate triangle a-b-b samples only that edge.
  const Mesh m = triangle_mesh("/e", {a, b, b}, {{{0, 1, 2}}});
  const PointSet ps = sample_face_edges(m, 0.01);
  CHECK(ps.size() == oracle.size());
}

TEST_CASE("degenerate triangle collapses to one point") {
  const Vec3 v{0.003, 0.003, 0.003};
  const Mesh m = triangle_mesh("/d", {v, v, v}, {{{0, 1, 2}}});
  CHECK(sample_face_edges(m, 0.01).size() == 1);
}

TEST_CASE("equilateral triangle yields 9 distinct pre-snap samples") {
  // Side 0.03: each edge carries ceil(3)+1 = 4 points; 3 shared endpoints.
  const Vec3 a{0.0, 0.0, 0.0};
  const Vec3 b{0.03, 0.0, 0.0};
  const Vec3 c{0.015, 0.03 * std::sqrt(3.0) / 2.0, 0.0};
  std::set<std::array<double, 3>> presnap;
  for (const auto& [p, q] : {std::pair{a, b}, {b, c}, {c, a}}) {
    const int steps = static_cast<int>(std::ceil(distance(p, q) / 0.01));
    for (int i = 0; i <= steps; ++i) {
      const Vec3 s = lerp(p, q, static_cast<double>(i) / steps);
      presnap.insert({s.x, s.y, s.z});
    }
  }
  CHECK(presnap.size() == 9);

  // The library output matches the snapped-and-deduplicated oracle.
  std::set<VoxelKey> oracle;
  for (const auto& s : presnap) oracle.insert(voxel_key_of({s[0], s[1], s[2]}, 0.01));
  const Mesh m = triangle_mesh("/t", {a, b, c}, {{{0, 1, 2}}});
  const PointSet ps = sample_face_edges(m, 0.01);
  CHECK(ps.size() == oracle.size());
}

TEST_CASE("surface_points is the union of vertices and edge samples") {
  const Mesh no_faces = triangle_mesh("/v", {{0.001, 0.0, 0.0}, {0.1, 0.2, 0.3}}, {});
  CHECK(surface_points(no_faces, 0.01).keys == voxelize_vertices(no_faces, 0.01).keys);

  // Unit square from two triangles: count matches an independent enumerator.
  const Mesh square = triangle_mesh(
      "/sq", {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, {0.0, 1.0, 0.0}},
      {{{0, 1, 2}}, {{0, 2, 3}}});
  std::set<VoxelKey> oracle;
  for (const auto& v : square.vertices) oracle.insert(voxel_key_of(v, 0.01));
  for (const auto& f : square.faces) {
    const Vec3 tri[3] = {square.vertices[f[0]], square.vertices[f[1]], square.vertices[f[2]]};
    for (int e = 0; e < 3; ++e) {
      const Vec3 &p = tri[e], &q = tri[(e + 1) % 3];
      const int steps = std::max(1, static_cast<int>(std::ceil(distance(p, q) / 0.01)));
      for (int i = 0; i <= steps; ++i)
        oracle.insert(voxel_key_of(lerp(p, q, static_cast<double>(i) / steps), 0.01));
    }
  }
  CHECK(surface_points(square, 0.01).size() == oracle.size());

  // Determinism: identical meshes give identical point sets.
  CHECK(surface_points(square, 0.01).keys == surface_points(square, 0.01).keys);
}

TEST_CASE("surface_points contains voxelized vertices as a subset") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Mesh m;
  m.path = "/s";
  for (int i = 0; i < 12; ++i) m.vertices.push_back({u(rng), u(rng), u(rng)});
  for (int i = 0; i + 2 < 12; i += 3) m.faces.push_back({i, i + 1, i + 2});
  const auto all = surface_points(m, 0.01).keys;
  for (const auto& k : voxelize_vertices(m, 0.01).keys)
    CHECK(std::binary_search(all.begin(), all.end(), k));
}

TEST_CASE("point sets are invariant under vertex and face reordering") {
  const Mesh m = triangle_mesh(
      "/m", {{0.01, 0.02, 0.03}, {0.21, 0.02, 0.03}, {0.11, 0.22, 0.03}, {0.5, 0.5, 0.5}},
      {{{0, 1, 2}}, {{1, 2, 3}}});
  Mesh shuffled = m;
  std::swap(shuffled.vertices[0], shuffled.vertices[3]);
  // The swap remaps vertex 0 <-> 3 in the faces.
  shuffled.faces = {{{3, 1, 2}}, {{1, 2, 0}}};
  std::swap(shuffled.faces[0], shuffled.faces[1]);
  CHECK(surface_points(m, 0.01).keys == surface_points(shuffled, 0.01).keys);
}

TEST_CASE("aabb, centroid and volume proxy basics") {
  const Mesh cube = triangle_mesh(
      "/c",
      {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}},
      {{{0, 1, 2}}, {{4, 5, 6}}});
  const Box3 box = aabb(cube);
  CHECK(box.min == Vec3{0, 0, 0});
  CHECK(box.max == Vec3{1, 1, 1});
  CHECK(volume_proxy(box, 0.01) == doctest::Approx(1.0));

  // Flat plate: the degenerate axis clamps to one pitch.
  const Mesh plate =
      triangle_mesh("/p", {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{{0, 1, 2}}});
  CHECK(volume_proxy(aabb(plate), 0.01) == doctest::Approx(0.01));

  const Mesh point = triangle_mesh("/pt", {{0.123, 0.456, 0.789}}, {});
  const Vec3 c = centroid(voxelize_vertices(point, 0.01));
  CHECK(c.x == doctest::Approx(0.125).epsilon(1e-9));

  CHECK_THROWS_AS(aabb(Mesh{}), EmptyMesh);
  CHECK_THROWS_AS(centroid(PointSet{}), EmptyPointSet);
}

TEST_CASE("centroid lies inside the pitch-inflated aabb") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    Mesh m;
    m.path = "/c";
    for (int i = 0; i < 20; ++i) m.vertices.push_back({u(rng), u(rng), u(rng)});
    m.faces.push_back({0, 1, 2});
    const Vec3 c = centroid(surface_points(m, 0.01));
    CHECK(contains(aabb(m), c, 0.01));
  }
}

TEST_CASE("interior fill adds points on large faces") {
  const Mesh square = triangle_mesh(
      "/sq", {{0.0, 0.0, 0.0}, {0.3, 0.0, 0.0}, {0.3, 0.3, 0.0}, {0.0, 0.3, 0.0}},
      {{{0, 1, 2}}, {{0, 2, 3}}});
  const std::size_t edge_only = surface_points(square, 0.01, false).size();
  const std::size_t filled = surface_points(square, 0.01, true).size();
  CHECK(filled > 2 * edge_only);
}
