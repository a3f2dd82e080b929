// Per-mesh geometric reductions. Every point that takes part in inter-mesh
// distance computation lives on a single voxel grid anchored at the world
// origin, so two snapped points are separated by pitch * sqrt(integer).
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cadgraph/scene.hpp"

namespace cadgraph {

using VoxelKey = std::array<std::int64_t, 3>;

inline VoxelKey voxel_key_of(const Vec3& p, double pitch) {
  return {static_cast<std::int64_t>(std::floor(p.x / pitch)),
          static_cast<std::int64_t>(std::floor(p.y / pitch)),
          static_cast<std::int64_t>(std::floor(p.z / pitch))};
}

inline Vec3 voxel_center(const VoxelKey& k, double pitch) {
  return {(static_cast<double>(k[0]) + 0.5) * pitch, (static_cast<double>(k[1]) + 0.5) * pitch,
          (static_cast<double>(k[2]) + 0.5) * pitch};
}

// Deduplicated voxel-snapped samples of one mesh. Keys are kept sorted so the
// set is canonical: independent of vertex and face ordering in the source.
struct PointSet {
  std::vector<VoxelKey> keys;
  std::string source_mesh;
  double grid_pitch = 0.01;

  std::size_t size() const { return keys.size(); }
  bool empty() const { return keys.empty(); }
  Vec3 point(std::size_t i) const { return voxel_center(keys[i], grid_pitch); }
  std::vector<Vec3> points() const;
};

// Snaps every vertex to its voxel center and removes duplicates.
PointSet voxelize_vertices(const Mesh& mesh, double pitch = 0.01);

// Points with `spacing` steps along each triangle edge (endpoints included),
// then snapped and deduplicated at the same pitch.
PointSet sample_face_edges(const Mesh& mesh, double spacing = 0.01);

// Union of the two reductions above; the only geometry used for inter-mesh
// distances. `fill_interiors` adds a barycentric interior fill on top of the
// edge sampling; off by default.
PointSet surface_points(const Mesh& mesh, double pitch = 0.01, bool fill_interiors = false);

Box3 aabb(const Mesh& mesh);

Vec3 centroid(const PointSet& points);

// Product of box extents; zero-extent axes are clamped to one pitch first so
// plates and rods still screen by size.
double volume_proxy(const Box3& box, double pitch = 0.01);

// Merge helper used by grouping: union of several point sets, deduplicated.
PointSet merge_point_sets(const std::vector<const PointSet*>& sets, const std::string& source);

}  // namespace cadgraph
