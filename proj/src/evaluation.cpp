#include "cadgraph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"

namespace cadgraph {

using nlohmann::json;

AccuracyResult label_accuracy(const std::map<std::string, SemanticLabel>& predictions,
                              const std::map<std::string, SemanticLabel>& ground_truth,
                              const std::set<std::string>& scope) {
  if (scope.empty()) throw EmptyScope("label_accuracy needs a non-empty scope");
  AccuracyResult result;
  result.scope_size = scope.size();
  for (const auto& path : scope) {
    const auto gt = ground_truth.find(path);
    if (gt == ground_truth.end()) throw EmptyScope("ground truth missing for " + path);
    const auto pred = predictions.find(path);
    if (pred == predictions.end()) continue;  // missing prediction counts as wrong
    if (pred->second.group == gt->second.group) {
      ++result.group_matches;
      if (pred->second.name == gt->second.name) ++result.name_matches;
    }
  }
  result.name_accuracy = static_cast<double>(result.name_matches) / result.scope_size;
  result.group_accuracy = static_cast<double>(result.group_matches) / result.scope_size;
  return result;
}

std::string format_percent(double fraction) {
  // Half-up to one decimal place.
  const double rounded = std::floor(fraction * 1000.0 + 0.5) / 10.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", rounded);
  return buf;
}

std::map<std::string, DetectionCounts> unit_detection_report(
    const std::map<std::string, SemanticLabel>& predictions,
    const std::vector<GroundTruthUnit>& ground_truth_units) {
  std::map<std::string, DetectionCounts> report;
  for (const auto& unit : ground_truth_units) {
    if (unit.mesh_paths.empty()) throw EmptyScope("ground-truth unit with no meshes");
    std::size_t hits = 0;
    for (const auto& path : unit.mesh_paths) {
      const auto it = predictions.find(path);
      if (it != predictions.end() && it->second.group == unit.type) ++hits;
    }
    DetectionCounts& counts = report[unit.type];
    if (hits == unit.mesh_paths.size())
      ++counts.fully;
    else if (hits > 0)
      ++counts.partially;
    else
      ++counts.missed;
  }
  return report;
}

LabelDistribution label_distribution(const std::map<std::string, SemanticLabel>& labels,
                                     std::size_t fold_threshold) {
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  LabelDistribution dist;
  dist.total = labels.size();
  for (const auto& [path, label] : labels) {
    ++counts[{label.group, label.name}];
    ++dist.by_group[label.group];
  }
  for (const auto& [key, count] : counts) {
    if (count < fold_threshold) {
      dist.others += count;
    } else {
      dist.entries.push_back({key.first, key.second, count});
    }
  }
  std::sort(dist.entries.begin(), dist.entries.end(),
            [](const DistributionEntry& a, const DistributionEntry& b) {
              if (a.count != b.count) return a.count > b.count;
              return std::tie(a.group, a.name) < std::tie(b.group, b.name);
            });
  return dist;
}

std::string evaluation_report_json(const AccuracyResult& accuracy,
                                   const std::map<std::string, DetectionCounts>& detection,
                                   const LabelDistribution& distribution) {
  json doc;
  doc["schema"] = "cadgraph/1";
  doc["accuracy"] = {{"scope_size", accuracy.scope_size},
                     {"name_matches", accuracy.name_matches},
                     {"group_matches", accuracy.group_matches},
                     {"name_accuracy", accuracy.name_accuracy},
                     {"group_accuracy", accuracy.group_accuracy},
                     {"name_accuracy_display", format_percent(accuracy.name_accuracy)},
                     {"group_accuracy_display", format_percent(accuracy.group_accuracy)}};
  json jd = json::object();
  for (const auto& [type, counts] : detection)
    jd[type] = {{"fully", counts.fully}, {"partially", counts.partially}, {"missed", counts.missed}};
  doc["unit_detection"] = std::move(jd);
  json entries = json::array();
  for (const auto& e : distribution.entries)
    entries.push_back({{"group", e.group}, {"name", e.name}, {"count", e.count}});
  doc["distribution"] = {{"entries", std::move(entries)},
                         {"others", distribution.others},
                         {"total", distribution.total}};
  json by_group = json::object();
  for (const auto& [group, count] : distribution.by_group) by_group[group] = count;
  doc["distribution"]["by_group"] = std::move(by_group);
  return doc.dump(2);
}

}  // namespace cadgraph
