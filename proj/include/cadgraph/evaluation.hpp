// Accuracy metrics and detection counts for labeled scenes, plus the label
// distribution report with small-category folding.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cadgraph/labels.hpp"

namespace cadgraph {

struct AccuracyResult {
  double name_accuracy = 0.0;   // exact (group, name) matches / scope size
  double group_accuracy = 0.0;  // group matches / scope size
  std::size_t scope_size = 0;
  std::size_t name_matches = 0;
  std::size_t group_matches = 0;
};

// Meshes in scope without a prediction count as wrong.
AccuracyResult label_accuracy(const std::map<std::string, SemanticLabel>& predictions,
                              const std::map<std::string, SemanticLabel>& ground_truth,
                              const std::set<std::string>& scope);

// Display rounding: one decimal place, half-up ("79.9%").
std::string format_percent(double fraction);

struct GroundTruthUnit {
  std::string type;  // group label of the unit
  std::set<std::string> mesh_paths;
};

struct DetectionCounts {
  std::size_t fully = 0;
  std::size_t partially = 0;
  std::size_t missed = 0;
};

// A unit is FULLY found when every mesh carries the unit's group label in the
// predictions, PARTIALLY when at least one does, MISSED when none do.
std::map<std::string, DetectionCounts> unit_detection_report(
    const std::map<std::string, SemanticLabel>& predictions,
    const std::vector<GroundTruthUnit>& ground_truth_units);

struct DistributionEntry {
  std::string group;
  std::string name;
  std::size_t count = 0;
};

struct LabelDistribution {
  std::vector<DistributionEntry> entries;  // descending count, then name
  std::size_t others = 0;                  // folded names below the threshold
  std::size_t total = 0;
  std::map<std::string, std::size_t> by_group;
};

LabelDistribution label_distribution(const std::map<std::string, SemanticLabel>& labels,
                                     std::size_t fold_threshold = 25);

std::string evaluation_report_json(const AccuracyResult& accuracy,
                                   const std::map<std::string, DetectionCounts>& detection,
                                   const LabelDistribution& distribution);

}  // namespace cadgraph
