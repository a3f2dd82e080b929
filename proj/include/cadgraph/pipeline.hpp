// Pipeline configuration and the stage orchestrator behind `cadgraph`.
// Every stage reads and writes files, so each one is independently
// invocable on the previous stage's output.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cadgraph/clustering.hpp"
#include "cadgraph/functional.hpp"
#include "cadgraph/grouping.hpp"
#include "cadgraph/labeling.hpp"
#include "cadgraph/scene_graph.hpp"
#include "cadgraph/scene_io.hpp"
#include "cadgraph/synth.hpp"

namespace cadgraph {

struct LabelerSettings {
  std::string kind = "file";  // "file" or "remote"
  std::string labels_file;    // file labeler: path -> {group,name} table
  std::string vocabulary_file;
  std::string endpoint;
  std::string model = "gpt-4o";
  std::string api_key_env = "CADGRAPH_API_KEY";
  int concurrency = 4;
  int max_attempts = 3;
};

struct PipelineConfig {
  double voxel_pitch = 0.01;
  double volume_threshold = 1e-6;
  double proximity_r_max = 0.10;
  double epsilon = 0.01;
  int min_samples = 1;
  double distance_cutoff = 0.05;
  bool fill_face_interiors = false;
  std::vector<std::string> pipe_groups{"Pipe assembly"};
  std::vector<std::string> functional_groups{"Valve assembly", "Gauge", "Tank", "Pump Unit"};
  std::vector<std::string> exclude_patterns;
  std::vector<std::string> ground_patterns;
  LabelerSettings labeler;
  std::string output_dir = "out";

  void validate() const;  // throws ConfigError
  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig load(const std::string& file);
};

// Serialization helpers shared by the CLI stages.
std::string groups_to_json(const std::vector<MeshGroup>& groups, double pitch);
std::vector<MeshGroup> groups_from_json(const std::string& text, double* pitch = nullptr);
std::string clusters_to_json(const Clustering& clustering,
                             const std::vector<std::pair<int, int>>& adjacency);
void clusters_from_json(const std::string& text, Clustering* clustering,
                        std::vector<std::pair<int, int>>* adjacency);

struct RunAllResult {
  std::string output_dir;
  SceneStats stats;
  std::size_t group_count = 0;
  std::size_t cluster_count = 0;
  std::size_t label_failures = 0;
  std::size_t unit_count = 0;
  std::size_t functional_edge_count = 0;
  SceneGraph graph;
  FunctionalGraph functional;
  Clustering clustering;
  std::vector<MeshGroup> groups;
};

// Runs ingest -> preprocess -> group -> cluster -> graph -> label ->
// functional, writing every stage artifact plus a manifest (config snapshot,
// input hashes, counters; timings go to the log, keeping artifacts
// byte-stable across reruns).
RunAllResult run_all(const PipelineConfig& config, const std::string& input_file,
                     SceneFormat format, const std::string& input_units = "m");

std::string read_text_file(const std::string& file);   // throws UnreadableFile
void write_text_file(const std::string& file, const std::string& text);

}  // namespace cadgraph
