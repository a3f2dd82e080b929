#pragma once

#include <utility>
#include <vector>

#include "cadgraph/spatial_index.hpp"

namespace cadgraph {

constexpr int kNoise = -1;

struct Clustering {
  std::vector<int> labels;  // group id -> cluster id, kNoise for noise
  double epsilon = 0.01;
  int min_samples = 1;

  int cluster_count() const;
  // Clusters as sorted member lists, ordered by cluster id.
  std::vector<std::vector<int>> clusters() const;
};

// Standard DBSCAN over the sparse distance map. A point is core when its
// epsilon-neighborhood, itself included, holds at least min_samples points.
// Cluster ids are consecutive, assigned in order of each cluster's first
// (lowest-id) member, so results are deterministic.
Clustering dbscan(int group_count, const SparseDistanceMap& distances, double epsilon = 0.01,
                  int min_samples = 1);

// Union-find connected components over an explicit edge list; the oracle for
// the min_samples = 1 case and a fast path.
Clustering connected_components(const std::vector<std::pair<int, int>>& pairs, int group_count);

}  // namespace cadgraph
