#include "cadgraph/clustering.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "cadgraph/errors.hpp"

namespace cadgraph {

int Clustering::cluster_count() const {
  int max_id = -1;
  for (int l : labels) max_id = std::max(max_id, l);
  return max_id + 1;
}

std::vector<std::vector<int>> Clustering::clusters() const {
  std::vector<std::vector<int>> out(cluster_count());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kNoise) out[labels[i]].push_back(static_cast<int>(i));
  return out;
}

Clustering dbscan(int group_count, const SparseDistanceMap& distances, double epsilon,
                  int min_samples) {
  if (epsilon > distances.cutoff)
    throw EpsilonExceedsCutoff("epsilon exceeds the distance map's cutoff");
  if (min_samples < 1) throw Error("min_samples must be at least 1");

  std::vector<std::vector<int>> neighbors(group_count);
  for (const auto& [pair, d] : distances.entries) {
    if (d > epsilon) continue;
    if (pair.first < 0 || pair.second >= group_count)
      throw Error("distance map references unknown group id");
    neighbors[pair.first].push_back(pair.second);
    neighbors[pair.second].push_back(pair.first);
  }
  for (auto& n : neighbors) std::sort(n.begin(), n.end());

  Clustering result;
  result.labels.assign(group_count, kNoise);
  result.epsilon = epsilon;
  result.min_samples = min_samples;

  // Neighborhood includes the point itself.
  auto is_core = [&](int i) { return static_cast<int>(neighbors[i].size()) + 1 >= min_samples; };

  int next_cluster = 0;
  std::vector<bool> visited(group_count, false);
  for (int seed = 0; seed < group_count; ++seed) {
    if (visited[seed] || !is_core(seed)) continue;
    const int cluster = next_cluster++;
    std::deque<int> frontier{seed};
    visited[seed] = true;
    result.labels[seed] = cluster;
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop_front();
      for (int u : neighbors[v]) {
        if (result.labels[u] == kNoise) result.labels[u] = cluster;  // border point
        if (!visited[u] && is_core(u)) {
          visited[u] = true;
          frontier.push_back(u);
        }
      }
    }
  }
  return result;
}

Clustering connected_components(const std::vector<std::pair<int, int>>& pairs, int group_count) {
  std::vector<int> parent(group_count);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [a, b] : pairs) {
    const int ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  Clustering result;
  result.labels.assign(group_count, kNoise);
  result.min_samples = 1;
  int next_cluster = 0;
  std::vector<int> root_cluster(group_count, -1);
  for (int i = 0; i < group_count; ++i) {
    const int root = find(i);
    if (root_cluster[root] < 0) root_cluster[root] = next_cluster++;
    result.labels[i] = root_cluster[root];
  }
  return result;
}

}  // namespace cadgraph
