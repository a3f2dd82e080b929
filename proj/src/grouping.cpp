#include "cadgraph/grouping.hpp"

#include <algorithm>
#include <cmath>

#include "cadgraph/errors.hpp"
#include "cadgraph/spatial_index.hpp"

namespace cadgraph {

Classification classify_meshes(const Scene& scene, double volume_threshold, double pitch) {
  Classification out;
  for (const auto& mesh : scene.meshes) {
    if (!mesh.active()) continue;
    if (volume_proxy(aabb(mesh), pitch) <= volume_threshold)
      out.small_paths.push_back(mesh.path);
    else
      out.large_paths.push_back(mesh.path);
  }
  return out;
}

std::vector<MeshGroup> group_small_meshes(const Scene& scene, const GroupingParams& params,
                                          GroupingReport* report) {
  const Classification cls = classify_meshes(scene, params.volume_threshold, params.pitch);
  GroupingReport local;
  local.small_count = cls.small_paths.size();
  local.large_count = cls.large_paths.size();

  // Anchor candidates: one provisional group per large mesh.
  std::vector<MeshGroup> anchors;
  anchors.reserve(cls.large_paths.size());
  std::vector<PointSet> large_points;
  for (const auto& path : cls.large_paths) {
    const Mesh* mesh = scene.find(path);
    MeshGroup g;
    g.id = static_cast<int>(anchors.size());
    g.representative_path = path;
    g.merged_points = surface_points(*mesh, params.pitch, params.fill_interiors);
    anchors.push_back(std::move(g));
  }
  const GridIndex grid = build_grid(anchors, params.pitch);

  // Each small mesh attaches to the nearest large mesh within r_max, ties to
  // the lexicographically smallest path. Promoted smalls never become
  // targets inside this pass.
  std::vector<std::vector<std::string>> attached(anchors.size());
  std::vector<std::string> promoted;
  for (const auto& path : cls.small_paths) {
    const Mesh* mesh = scene.find(path);
    const PointSet points = surface_points(*mesh, params.pitch, params.fill_interiors);
    const auto nearest = nearest_anchors(points, anchors, grid, params.proximity_r_max);
    if (nearest) {
      int best_anchor = nearest->group_ids.front();
      for (int gid : nearest->group_ids)
        if (anchors[gid].representative_path < anchors[best_anchor].representative_path)
          best_anchor = gid;
      attached[best_anchor].push_back(path);
      ++local.merged_count;
    } else {
      promoted.push_back(path);
      ++local.promoted_count;
    }
  }

  // Assemble final groups: anchors plus promoted smalls, ordered by
  // representative path so ids are stable under input permutation.
  struct Draft {
    std::string representative;
    std::vector<std::string> members;
  };
  std::vector<Draft> drafts;
  for (const auto& anchor : anchors) {
    Draft d{anchor.representative_path, attached[anchor.id]};
    d.members.push_back(anchor.representative_path);
    std::sort(d.members.begin(), d.members.end());
    drafts.push_back(std::move(d));
  }
  for (const auto& path : promoted) drafts.push_back({path, {path}});
  std::sort(drafts.begin(), drafts.end(),
            [](const Draft& a, const Draft& b) { return a.representative < b.representative; });

  std::vector<MeshGroup> groups;
  groups.reserve(drafts.size());
  for (const auto& draft : drafts) {
    MeshGroup g;
    g.id = static_cast<int>(groups.size());
    g.representative_path = draft.representative;
    g.member_paths = draft.members;
    std::vector<PointSet> member_points;
    member_points.reserve(draft.members.size());
    Box3 box = Box3::empty_init();
    for (const auto& path : draft.members) {
      const Mesh* mesh = scene.find(path);
      member_points.push_back(surface_points(*mesh, params.pitch, params.fill_interiors));
      box.merge(aabb(*mesh));
    }
    std::vector<const PointSet*> refs;
    for (const auto& ps : member_points) refs.push_back(&ps);
    g.merged_points = merge_point_sets(refs, draft.representative);
    g.aabb = box;
    g.centroid = centroid(g.merged_points);
    local.merge_histogram[g.member_paths.size()]++;
    groups.push_back(std::move(g));
  }

  if (report) *report = local;
  return groups;
}

}  // namespace cadgraph
