// Merges sub-threshold meshes into their nearest large neighbor. The
// resulting mesh groups are the nodes of the scene graph.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cadgraph/geometry.hpp"
#include "cadgraph/scene.hpp"

namespace cadgraph {

struct MeshGroup {
  int id = 0;
  std::string representative_path;       // the anchor (large) mesh
  std::vector<std::string> member_paths;  // sorted, contains representative
  PointSet merged_points;
  Box3 aabb;
  Vec3 centroid;
};

struct GroupingParams {
  double volume_threshold = 1e-6;  // m^3, meshes at or below are "small"
  double proximity_r_max = 0.10;   // m, max small-to-large attach distance
  double pitch = 0.01;             // m, voxel pitch for surface points
  bool fill_interiors = false;
};

struct Classification {
  std::vector<std::string> small_paths;
  std::vector<std::string> large_paths;
};

// Partitions active non-ground meshes by volume proxy; ties go to small.
Classification classify_meshes(const Scene& scene, double volume_threshold = 1e-6,
                               double pitch = 0.01);

struct GroupingReport {
  std::size_t small_count = 0;
  std::size_t large_count = 0;
  std::size_t merged_count = 0;    // small meshes attached to a large anchor
  std::size_t promoted_count = 0;  // small meshes with no anchor in range
  std::map<std::size_t, std::size_t> merge_histogram;  // group size -> count
};

// One group per large mesh plus one per promoted small mesh. Each small mesh
// attaches to the large mesh with minimal surface-point distance if that
// distance is <= r_max; distance ties break to the lexicographically smallest
// large-mesh path.
std::vector<MeshGroup> group_small_meshes(const Scene& scene, const GroupingParams& params,
                                          GroupingReport* report = nullptr);

}  // namespace cadgraph
