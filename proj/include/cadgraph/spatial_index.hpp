// Uniform-grid spatial hash over group point sets and the sparse minimal
// distance map built from it. Replaces a full pairwise distance matrix: any
// pair farther apart than the cutoff simply has no entry.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cadgraph/grouping.hpp"

namespace cadgraph {

struct CellKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct GridIndex {
  double cell_size = 0.01;
  // cell -> (group id, point index into that group's merged_points)
  std::unordered_map<VoxelKey, std::vector<std::pair<int, std::uint32_t>>, CellKeyHash> cells;
  std::size_t point_count = 0;
};

// Unordered group-id pair -> minimal point distance, only for pairs within
// the cutoff. Absence of a pair means its true distance exceeds the cutoff.
struct SparseDistanceMap {
  std::map<std::pair<int, int>, double> entries;  // keys normalized (a < b)
  double cutoff = 0.05;

  std::optional<double> get(int a, int b) const {
    if (a == b) return 0.0;
    auto it = entries.find(std::minmax(a, b));
    return it == entries.end() ? std::nullopt : std::optional<double>(it->second);
  }
};

GridIndex build_grid(const std::vector<MeshGroup>& groups, double cell_size = 0.01);

// Exact minimal Euclidean distance between two groups' point sets if it is
// <= cutoff, std::nullopt (ABOVE_CUTOFF) otherwise.
std::optional<double> min_distance(const MeshGroup& a, const MeshGroup& b, const GridIndex& grid,
                                   double cutoff);

// All indexed groups at the exact minimal distance from `probe`, within the
// cutoff. One grid sweep instead of one per candidate group; ties are
// returned together so callers can apply their own tie-breaking.
struct NearestAnchors {
  double distance = 0.0;
  std::vector<int> group_ids;  // every group achieving the minimum, sorted
};
std::optional<NearestAnchors> nearest_anchors(const PointSet& probe,
                                              const std::vector<MeshGroup>& groups,
                                              const GridIndex& grid, double cutoff);

SparseDistanceMap pairwise_min_distances(const std::vector<MeshGroup>& groups,
                                         const GridIndex& grid, double cutoff = 0.05);

// Group-id pairs with distance <= epsilon, sorted. epsilon must not exceed
// the map's cutoff.
std::vector<std::pair<int, int>> adjacency_pairs(const SparseDistanceMap& distances,
                                                 double epsilon = 0.01);

}  // namespace cadgraph
