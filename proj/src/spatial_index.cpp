#include "cadgraph/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cadgraph/errors.hpp"

namespace cadgraph {

namespace {

// All point sets live on one origin-anchored voxel grid, so the distance
// between two samples is pitch * sqrt of an integer. Computing in integer
// space keeps comparisons at grid multiples (the epsilon boundary) exact.
std::uint64_t squared_voxel_distance(const VoxelKey& a, const VoxelKey& b) {
  const std::int64_t dx = a[0] - b[0];
  const std::int64_t dy = a[1] - b[1];
  const std::int64_t dz = a[2] - b[2];
  return static_cast<std::uint64_t>(dx * dx) + static_cast<std::uint64_t>(dy * dy) +
         static_cast<std::uint64_t>(dz * dz);
}

double voxel_distance(std::uint64_t squared, double pitch) {
  return pitch * std::sqrt(static_cast<double>(squared));
}

VoxelKey cell_of(const Vec3& p, double cell_size) { return voxel_key_of(p, cell_size); }

double common_pitch(const std::vector<MeshGroup>& groups) {
  double pitch = 0.01;
  bool seen = false;
  for (const auto& g : groups) {
    if (g.merged_points.empty()) continue;
    if (seen && g.merged_points.grid_pitch != pitch)
      throw Error("groups indexed together must share one voxel pitch");
    pitch = g.merged_points.grid_pitch;
    seen = true;
  }
  return pitch;
}

}  // namespace

GridIndex build_grid(const std::vector<MeshGroup>& groups, double cell_size) {
  if (!(cell_size > 0.0)) throw Error("cell_size must be positive");
  GridIndex grid;
  grid.cell_size = cell_size;
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].id != static_cast<int>(i))
      throw Error("group ids must match their position in the group list");
  for (const auto& group : groups) {
    const PointSet& ps = group.merged_points;
    for (std::uint32_t i = 0; i < ps.size(); ++i) {
      grid.cells[cell_of(ps.point(i), cell_size)].emplace_back(group.id, i);
      ++grid.point_count;
    }
  }
  return grid;
}

std::optional<double> min_distance(const MeshGroup& a, const MeshGroup& b, const GridIndex& grid,
                                   double cutoff) {
  if (a.merged_points.empty() || b.merged_points.empty())
    throw EmptyPointSet("min_distance with empty group point set");
  if (a.id == b.id) return 0.0;

  // a is only iterated, so it does not need to be indexed; b must be.
  const MeshGroup& query = a;
  const MeshGroup& other = b;
  const double pitch = query.merged_points.grid_pitch;
  const double s = grid.cell_size;

  std::uint64_t best = UINT64_MAX;
  for (const auto& key : query.merged_points.keys) {
    const Vec3 p = voxel_center(key, pitch);
    const VoxelKey home = cell_of(p, s);
    for (std::int64_t r = 0;; ++r) {
      // Any point in an unexamined shell is farther than (r-1) * cell_size,
      // so stop once that bound cannot beat the current best or the cutoff.
      const double shell_bound = static_cast<double>(r - 1) * s;
      if (r > 0 && best != UINT64_MAX && shell_bound >= voxel_distance(best, pitch)) break;
      if (r > 0 && shell_bound >= cutoff) break;
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        for (std::int64_t dy = -r; dy <= r; ++dy) {
          for (std::int64_t dz = -r; dz <= r; ++dz) {
            if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != r) continue;
            const auto it = grid.cells.find({home[0] + dx, home[1] + dy, home[2] + dz});
            if (it == grid.cells.end()) continue;
            for (const auto& [gid, pidx] : it->second) {
              if (gid != other.id) continue;
              best = std::min(best, squared_voxel_distance(key, other.merged_points.keys[pidx]));
            }
          }
        }
      }
      if (best == 0) break;
    }
    if (best == 0) break;
  }
  if (best == UINT64_MAX) return std::nullopt;
  const double d = voxel_distance(best, pitch);
  if (d > cutoff) return std::nullopt;
  return d;
}

std::optional<NearestAnchors> nearest_anchors(const PointSet& probe,
                                              const std::vector<MeshGroup>& groups,
                                              const GridIndex& grid, double cutoff) {
  if (probe.empty()) throw EmptyPointSet("nearest_anchors with an empty probe");
  const double pitch = probe.grid_pitch;
  const double s = grid.cell_size;

  std::uint64_t best = UINT64_MAX;
  std::set<int> at_best;
  for (const auto& key : probe.keys) {
    const VoxelKey home = cell_of(voxel_center(key, pitch), s);
    for (std::int64_t r = 0;; ++r) {
      // Points in unexamined shells are strictly farther than (r-1) * s, so
      // neither a new minimum nor a tie can appear beyond these bounds.
      const double shell_bound = static_cast<double>(r - 1) * s;
      if (r > 0 && shell_bound > cutoff) break;
      if (r > 0 && best != UINT64_MAX && shell_bound >= voxel_distance(best, pitch)) break;
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        for (std::int64_t dy = -r; dy <= r; ++dy) {
          for (std::int64_t dz = -r; dz <= r; ++dz) {
            if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != r) continue;
            const auto it = grid.cells.find({home[0] + dx, home[1] + dy, home[2] + dz});
            if (it == grid.cells.end()) continue;
            for (const auto& [gid, pidx] : it->second) {
              const std::uint64_t d2 =
                  squared_voxel_distance(key, groups[gid].merged_points.keys[pidx]);
              if (d2 < best) {
                best = d2;
                at_best.clear();
                at_best.insert(gid);
              } else if (d2 == best) {
                at_best.insert(gid);
              }
            }
          }
        }
      }
    }
  }
  if (best == UINT64_MAX) return std::nullopt;
  const double d = voxel_distance(best, pitch);
  if (d > cutoff) return std::nullopt;
  NearestAnchors out;
  out.distance = d;
  out.group_ids.assign(at_best.begin(), at_best.end());
  return out;
}

SparseDistanceMap pairwise_min_distances(const std::vector<MeshGroup>& groups,
                                         const GridIndex& grid, double cutoff) {
  SparseDistanceMap map;
  map.cutoff = cutoff;
  if (grid.cells.empty()) return map;
  const double pitch = common_pitch(groups);
  const double s = grid.cell_size;
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].id != static_cast<int>(i))
      throw Error("group ids must match their position in the group list");

  // Two-level scheme. A coarse grid at the cutoff size finds candidate
  // group pairs and the probe points worth querying: any point pair within
  // the cutoff sits in coarse cells at most one apart per axis. The exact
  // minimum then comes from fine-grid shell queries over those points only.
  using CoarseIndex = std::unordered_map<VoxelKey, std::vector<std::uint32_t>, CellKeyHash>;
  std::vector<CoarseIndex> coarse(groups.size());
  std::unordered_map<VoxelKey, std::vector<int>, CellKeyHash> occupancy;
  for (const auto& group : groups) {
    const PointSet& ps = group.merged_points;
    for (std::uint32_t i = 0; i < ps.size(); ++i) {
      const VoxelKey cc = cell_of(ps.point(i), cutoff);
      coarse[group.id][cc].push_back(i);
      auto& cell_groups = occupancy[cc];
      if (cell_groups.empty() || cell_groups.back() != group.id)
        cell_groups.push_back(group.id);  // groups arrive in ascending order
    }
  }

  std::set<std::pair<int, int>> candidates;
  auto cross = [&](const std::vector<int>& a, const std::vector<int>& b, bool same_cell) {
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = same_cell ? i + 1 : 0; j < b.size(); ++j)
        if (a[i] != b[j]) candidates.insert(std::minmax(a[i], b[j]));
  };
  for (const auto& [cell, cell_groups] : occupancy) {
    cross(cell_groups, cell_groups, true);
    for (std::int64_t dx = 0; dx <= 1; ++dx) {
      for (std::int64_t dy = dx == 0 ? 0 : -1; dy <= 1; ++dy) {
        for (std::int64_t dz = (dx == 0 && dy == 0) ? 1 : -1; dz <= 1; ++dz) {
          const auto it = occupancy.find({cell[0] + dx, cell[1] + dy, cell[2] + dz});
          if (it != occupancy.end()) cross(cell_groups, it->second, false);
        }
      }
    }
  }

  // Exact minimal distance per candidate pair, probing with the smaller
  // side and only from coarse cells that have the other group nearby.
  for (const auto& [ga, gb] : candidates) {
    const bool a_probes =
        groups[ga].merged_points.size() <= groups[gb].merged_points.size();
    const MeshGroup& probe = a_probes ? groups[ga] : groups[gb];
    const MeshGroup& other = a_probes ? groups[gb] : groups[ga];

    std::uint64_t best = UINT64_MAX;
    for (const auto& [cc, point_indices] : coarse[probe.id]) {
      bool near = false;
      for (std::int64_t dx = -1; dx <= 1 && !near; ++dx)
        for (std::int64_t dy = -1; dy <= 1 && !near; ++dy)
          for (std::int64_t dz = -1; dz <= 1 && !near; ++dz)
            if (coarse[other.id].contains({cc[0] + dx, cc[1] + dy, cc[2] + dz})) near = true;
      if (!near) continue;

      for (std::uint32_t idx : point_indices) {
        const VoxelKey& key = probe.merged_points.keys[idx];
        const VoxelKey home = cell_of(voxel_center(key, pitch), s);
        for (std::int64_t r = 0;; ++r) {
          const double shell_bound = static_cast<double>(r - 1) * s;
          if (r > 0 && best != UINT64_MAX && shell_bound >= voxel_distance(best, pitch)) break;
          if (r > 0 && shell_bound >= cutoff) break;
          for (std::int64_t dx = -r; dx <= r; ++dx) {
            for (std::int64_t dy = -r; dy <= r; ++dy) {
              for (std::int64_t dz = -r; dz <= r; ++dz) {
                if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != r) continue;
                const auto it = grid.cells.find({home[0] + dx, home[1] + dy, home[2] + dz});
                if (it == grid.cells.end()) continue;
                for (const auto& [gid, pidx] : it->second) {
                  if (gid != other.id) continue;
                  best = std::min(best,
                                  squared_voxel_distance(key, other.merged_points.keys[pidx]));
                }
              }
            }
          }
          if (best == 0) break;
        }
        if (best == 0) break;
      }
      if (best == 0) break;
    }
    if (best == UINT64_MAX) continue;
    const double d = voxel_distance(best, pitch);
    if (d <= cutoff) map.entries.emplace(std::minmax(ga, gb), d);
  }
  return map;
}

std::vector<std::pair<int, int>> adjacency_pairs(const SparseDistanceMap& distances,
                                                 double epsilon) {
  if (epsilon > distances.cutoff)
    throw EpsilonExceedsCutoff("epsilon " + std::to_string(epsilon) + " exceeds cutoff " +
                               std::to_string(distances.cutoff));
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [key, d] : distances.entries)
    if (d <= epsilon) pairs.push_back(key);
  return pairs;
}

}  // namespace cadgraph
