#include "cadgraph/functional.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"

namespace cadgraph {

using nlohmann::json;

namespace {

std::map<int, std::vector<int>> adjacency_lists(const SceneGraph& graph) {
  std::map<int, std::vector<int>> adj;
  for (const auto& e : graph.edges) {
    if (e.kind != EdgeKind::Adjacent) continue;
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& [id, list] : adj) std::sort(list.begin(), list.end());
  return adj;
}

}  // namespace

bool FunctionalGraph::same_topology(const FunctionalGraph& o) const {
  if (units.size() != o.units.size() || edges != o.edges) return false;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].index != o.units[i].index) return false;
    if (units[i].unit_group != o.units[i].unit_group) return false;
  }
  return true;
}

std::vector<FunctionalUnit> identify_functional_units(
    const SceneGraph& graph, const std::set<std::string>& functional_groups,
    std::size_t* unlabeled_warning_count) {
  std::size_t unlabeled = 0;
  std::map<int, std::string> node_group;
  for (const auto& [id, node] : graph.nodes) {
    if (node.kind != NodeKind::Mesh) continue;
    if (!node.group_label) {
      ++unlabeled;
      continue;
    }
    if (functional_groups.contains(*node.group_label)) node_group[id] = *node.group_label;
  }
  if (unlabeled_warning_count) *unlabeled_warning_count = unlabeled;

  const auto adj = adjacency_lists(graph);

  // Connected components of same-label nodes under ADJACENT edges.
  std::map<int, int> component;  // node -> component id
  std::vector<std::vector<int>> components;
  for (const auto& [seed, group] : node_group) {
    if (component.contains(seed)) continue;
    std::vector<int> members{seed};
    component[seed] = static_cast<int>(components.size());
    std::vector<int> stack{seed};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      const auto it = adj.find(v);
      if (it == adj.end()) continue;
      for (int u : it->second) {
        const auto gu = node_group.find(u);
        if (gu == node_group.end() || gu->second != group) continue;
        if (component.contains(u)) continue;
        component[u] = component[seed];
        members.push_back(u);
        stack.push_back(u);
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }

  // Order components by their smallest member path, then index 1..k.
  std::vector<std::pair<std::string, std::size_t>> order;
  for (std::size_t c = 0; c < components.size(); ++c) {
    std::string smallest;
    for (int id : components[c]) {
      const std::string& path = graph.nodes.at(id).path;
      if (smallest.empty() || path < smallest) smallest = path;
    }
    order.emplace_back(smallest, c);
  }
  std::sort(order.begin(), order.end());

  std::vector<FunctionalUnit> units;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& members = components[order[rank].second];
    FunctionalUnit unit;
    unit.index = static_cast<int>(rank) + 1;
    unit.unit_group = node_group.at(members.front());
    unit.seed_nodes.insert(members.begin(), members.end());
    unit.member_nodes = unit.seed_nodes;
    Vec3 sum;
    for (int id : members) sum += graph.nodes.at(id).centroid;
    unit.seed_centroid = sum / static_cast<double>(members.size());
    units.push_back(std::move(unit));
  }
  return units;
}

FunctionalGraph extract_functional_relations(const SceneGraph& graph,
                                             const std::map<int, std::string>& semantic_map,
                                             const std::set<std::string>& pipe_groups,
                                             std::vector<FunctionalUnit> units,
                                             ExtractionStats* stats) {
  const auto adj = adjacency_lists(graph);
  std::sort(units.begin(), units.end(),
            [](const FunctionalUnit& a, const FunctionalUnit& b) { return a.index < b.index; });

  // The global marked set starts as the union of all unit members; overlap
  // between units would make claims ambiguous.
  std::set<int> marked;
  for (const auto& unit : units)
    for (int v : unit.member_nodes)
      if (!marked.insert(v).second)
        throw OverlappingUnits("node " + std::to_string(v) + " belongs to more than one unit");

  auto is_pipe = [&](int u) {
    const auto it = semantic_map.find(u);
    return it != semantic_map.end() && pipe_groups.contains(it->second);
  };

  ExtractionStats local;
  bool changed = true;
  while (changed) {
    changed = false;
    ++local.outer_iterations;
    for (auto& unit : units) {
      std::vector<int> newly_claimed;
      // Snapshot: nodes added this pass are visited on the next outer pass.
      const std::vector<int> members(unit.member_nodes.begin(), unit.member_nodes.end());
      for (int v : members) {
        const auto it = adj.find(v);
        if (it == adj.end()) continue;
        for (int u : it->second) {
          if (marked.contains(u) || !is_pipe(u)) continue;
          marked.insert(u);
          newly_claimed.push_back(u);
        }
      }
      if (!newly_claimed.empty()) {
        changed = true;
        local.claimed_nodes += newly_claimed.size();
        unit.member_nodes.insert(newly_claimed.begin(), newly_claimed.end());
      }
    }
  }

  // Edges between distinct units whose expanded members are adjacent.
  std::map<int, int> owner;  // node -> unit index
  for (const auto& unit : units)
    for (int v : unit.member_nodes) owner[v] = unit.index;

  FunctionalGraph out;
  for (const auto& e : graph.edges) {
    if (e.kind != EdgeKind::Adjacent) continue;
    const auto ia = owner.find(e.a);
    const auto ib = owner.find(e.b);
    if (ia == owner.end() || ib == owner.end()) continue;  // unclaimed node: skip
    if (ia->second == ib->second) continue;                // no self edges
    out.edges.insert(std::minmax(ia->second, ib->second));
  }
  out.units = std::move(units);
  if (stats) *stats = local;
  return out;
}

std::map<int, std::string> semantic_map_of(const SceneGraph& graph) {
  std::map<int, std::string> out;
  for (const auto& [id, node] : graph.nodes)
    if (node.kind == NodeKind::Mesh && node.group_label) out[id] = *node.group_label;
  return out;
}

std::string functional_to_json(const FunctionalGraph& graph) {
  json doc;
  doc["schema"] = "cadgraph/1";
  json units = json::array();
  for (const auto& unit : graph.units) {
    json ju;
    ju["index"] = unit.index;
    ju["group"] = unit.unit_group;
    ju["seed_centroid"] = json::array({unit.seed_centroid.x, unit.seed_centroid.y,
                                       unit.seed_centroid.z});
    ju["seed_nodes"] = unit.seed_nodes;
    ju["member_nodes"] = unit.member_nodes;
    units.push_back(std::move(ju));
  }
  doc["units"] = std::move(units);
  json edges = json::array();
  for (const auto& [a, b] : graph.edges) edges.push_back(json::array({a, b}));
  doc["edges"] = std::move(edges);
  return doc.dump();
}

FunctionalGraph functional_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw SchemaVersionMismatch("functional graph is not valid JSON");
  if (doc.value("schema", "") != "cadgraph/1")
    throw SchemaVersionMismatch("unsupported functional graph schema");
  FunctionalGraph graph;
  for (const auto& ju : doc["units"]) {
    FunctionalUnit unit;
    unit.index = ju["index"].get<int>();
    unit.unit_group = ju["group"].get<std::string>();
    const auto& c = ju["seed_centroid"];
    unit.seed_centroid = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
    for (const auto& v : ju.value("seed_nodes", json::array())) unit.seed_nodes.insert(v.get<int>());
    for (const auto& v : ju.value("member_nodes", json::array()))
      unit.member_nodes.insert(v.get<int>());
    graph.units.push_back(std::move(unit));
  }
  for (const auto& je : doc["edges"]) graph.edges.emplace(je[0].get<int>(), je[1].get<int>());
  return graph;
}

std::string functional_to_dot(const FunctionalGraph& graph) {
  std::ostringstream out;
  out << "graph functional {\n";
  for (const auto& unit : graph.units)
    out << "  u" << unit.index << " [label=\"" << unit.index << ": " << unit.unit_group
        << "\",color=red];\n";
  for (const auto& [a, b] : graph.edges) out << "  u" << a << " -- u" << b << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace cadgraph
