// Procedural generator of small industrial pipe scenes with exact ground
// truth: the independent oracle for grouping, clustering and the functional
// analysis. Geometry is deliberately coarse, with wide margins everywhere a
// contact is not intended, so voxelization cannot create accidental bridges.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cadgraph/evaluation.hpp"
#include "cadgraph/functional.hpp"
#include "cadgraph/labels.hpp"
#include "cadgraph/labeling.hpp"
#include "cadgraph/scene.hpp"

namespace cadgraph {

enum class AttachmentType { Valve, Gauge, Tank, FlangePair, BoltCluster };

AttachmentType attachment_type_from_string(const std::string& s);
std::string to_string(AttachmentType t);

struct PipeRun {
  std::vector<Vec3> waypoints;  // at least two
  double radius = 0.03;
};

struct Attachment {
  AttachmentType type = AttachmentType::Valve;
  int run = 0;
  double t = 0.5;  // arclength parameter in [0, 1]
  int count = 8;   // bolt clusters only
};

// Declared separation between two runs' structures; the generator validates
// that their geometry really is at least `min_gap` apart.
struct GapPair {
  int run_a = 0;
  int run_b = 0;
  double min_gap = 0.05;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  double max_segment_length = 0.3;  // pipes between units are subdivided
  std::vector<PipeRun> runs;
  std::vector<Attachment> attachments;
  std::vector<GapPair> gap_pairs;
  // Runs expected to end up in one cluster through sub-epsilon proximity
  // alone (no recorded contact); used by the epsilon-boundary cases.
  std::vector<GapPair> contact_pairs;

  std::string to_json() const;
  static SynthSpec from_json(const std::string& text);
  static SynthSpec load(const std::string& file);
};

struct SynthCase {
  Scene scene;
  std::map<std::string, SemanticLabel> gt_labels;
  std::vector<GroundTruthUnit> gt_units;     // ordered like gt_functional's units
  FunctionalGraph gt_functional;             // index/group/edges; no node ids
  std::vector<std::set<std::string>> gt_clusters;  // partition of mesh paths
  Vocabulary vocabulary;
};

SynthCase generate(const SynthSpec& spec);

void save_synth_case(const SynthCase& c, const std::string& out_dir);

// The vocabulary every generated case draws its labels from.
Vocabulary synth_vocabulary();

// Named cases used across tests and the acceptance suite.
std::vector<std::pair<std::string, SynthSpec>> bundled_suite();

SynthSpec linear_chain_spec();
SynthSpec adjacent_gauges_spec();
SynthSpec tank_star_spec();
SynthSpec disconnected_systems_spec();
SynthSpec direct_contact_spec();
SynthSpec contested_corridor_spec();
SynthSpec bolt_cluster_spec();
SynthSpec eps_boundary_merged_spec();
SynthSpec eps_boundary_separated_spec();

}  // namespace cadgraph
