// Functional units and the marked-set expansion that turns a labeled scene
// graph into the functional graph of a pipe system.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cadgraph/scene_graph.hpp"

namespace cadgraph {

struct FunctionalUnit {
  int index = 0;  // 1-based
  std::string unit_group;
  std::set<int> seed_nodes;    // the interconnected same-group seed
  std::set<int> member_nodes;  // seed plus claimed pipe nodes
  Vec3 seed_centroid;
};

struct FunctionalGraph {
  std::vector<FunctionalUnit> units;            // ordered by index
  std::set<std::pair<int, int>> edges;          // undirected, a < b, no self edges

  bool same_topology(const FunctionalGraph& o) const;
};

// Connected components of same-group-labeled nodes under ADJACENT edges, one
// unit per component, ordered by the smallest member path and indexed 1..k.
std::vector<FunctionalUnit> identify_functional_units(
    const SceneGraph& graph, const std::set<std::string>& functional_groups,
    std::size_t* unlabeled_warning_count = nullptr);

struct ExtractionStats {
  int outer_iterations = 0;
  std::size_t claimed_nodes = 0;
};

// Marked-set expansion: units claim unmarked pipe-labeled neighbors until no
// unit can grow, then edges are drawn between distinct units with adjacent
// members. Claim order is deterministic: ascending unit index, members and
// neighbors in sorted node-id order.
FunctionalGraph extract_functional_relations(const SceneGraph& graph,
                                             const std::map<int, std::string>& semantic_map,
                                             const std::set<std::string>& pipe_groups,
                                             std::vector<FunctionalUnit> units,
                                             ExtractionStats* stats = nullptr);

std::string functional_to_json(const FunctionalGraph& graph);
FunctionalGraph functional_from_json(const std::string& text);
std::string functional_to_dot(const FunctionalGraph& graph);

// semantic_map helper: node id -> group label for labeled mesh nodes.
std::map<int, std::string> semantic_map_of(const SceneGraph& graph);

}  // namespace cadgraph
