#include "cadgraph/pipeline.hpp"

#include <zlib.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"
#include "cadgraph/evaluation.hpp"

namespace cadgraph {

using nlohmann::json;

std::string read_text_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UnreadableFile("cannot open " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw UnreadableFile("cannot write " + file);
  out << text;
}

// -------------------------------------------------------------- config ----

void PipelineConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(voxel_pitch, "voxel_pitch");
  positive(volume_threshold, "volume_threshold");
  positive(proximity_r_max, "proximity_r_max");
  positive(epsilon, "epsilon");
  positive(distance_cutoff, "distance_cutoff");
  if (min_samples < 1) throw ConfigError("min_samples must be at least 1");
  if (epsilon > distance_cutoff) throw ConfigError("epsilon must not exceed distance_cutoff");
  if (labeler.kind != "file" && labeler.kind != "remote" && labeler.kind != "none")
    throw ConfigError("labeler.kind must be file, remote or none");
}

std::string PipelineConfig::to_json() const {
  json doc;
  doc["voxel_pitch"] = voxel_pitch;
  doc["volume_threshold"] = volume_threshold;
  doc["proximity_r_max"] = proximity_r_max;
  doc["epsilon"] = epsilon;
  doc["min_samples"] = min_samples;
  doc["distance_cutoff"] = distance_cutoff;
  doc["fill_face_interiors"] = fill_face_interiors;
  doc["pipe_groups"] = pipe_groups;
  doc["functional_groups"] = functional_groups;
  doc["exclude"] = exclude_patterns;
  doc["ground"] = ground_patterns;
  doc["output_dir"] = output_dir;
  doc["labeler"] = {{"kind", labeler.kind},
                    {"labels", labeler.labels_file},
                    {"vocabulary", labeler.vocabulary_file},
                    {"endpoint", labeler.endpoint},
                    {"model", labeler.model},
                    {"api_key_env", labeler.api_key_env},
                    {"concurrency", labeler.concurrency},
                    {"max_attempts", labeler.max_attempts}};
  return doc.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config is not valid JSON");
  PipelineConfig c;
  c.voxel_pitch = doc.value("voxel_pitch", c.voxel_pitch);
  c.volume_threshold = doc.value("volume_threshold", c.volume_threshold);
  c.proximity_r_max = doc.value("proximity_r_max", c.proximity_r_max);
  c.epsilon = doc.value("epsilon", c.epsilon);
  c.min_samples = doc.value("min_samples", c.min_samples);
  c.distance_cutoff = doc.value("distance_cutoff", c.distance_cutoff);
  c.fill_face_interiors = doc.value("fill_face_interiors", c.fill_face_interiors);
  if (doc.contains("pipe_groups")) c.pipe_groups = doc["pipe_groups"].get<std::vector<std::string>>();
  if (doc.contains("functional_groups"))
    c.functional_groups = doc["functional_groups"].get<std::vector<std::string>>();
  if (doc.contains("exclude")) c.exclude_patterns = doc["exclude"].get<std::vector<std::string>>();
  if (doc.contains("ground")) c.ground_patterns = doc["ground"].get<std::vector<std::string>>();
  c.output_dir = doc.value("output_dir", c.output_dir);
  if (doc.contains("labeler")) {
    const json& jl = doc["labeler"];
    c.labeler.kind = jl.value("kind", c.labeler.kind);
    c.labeler.labels_file = jl.value("labels", c.labeler.labels_file);
    c.labeler.vocabulary_file = jl.value("vocabulary", c.labeler.vocabulary_file);
    c.labeler.endpoint = jl.value("endpoint", c.labeler.endpoint);
    c.labeler.model = jl.value("model", c.labeler.model);
    c.labeler.api_key_env = jl.value("api_key_env", c.labeler.api_key_env);
    c.labeler.concurrency = jl.value("concurrency", c.labeler.concurrency);
    c.labeler.max_attempts = jl.value("max_attempts", c.labeler.max_attempts);
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& file) {
  return from_json(read_text_file(file));
}

// ----------------------------------------------------- stage documents ----

std::string groups_to_json(const std::vector<MeshGroup>& groups, double pitch) {
  json doc;
  doc["schema"] = "cadgraph/1";
  doc["pitch"] = pitch;
  json jgroups = json::array();
  for (const auto& g : groups) {
    json jg;
    jg["id"] = g.id;
    jg["representative"] = g.representative_path;
    jg["members"] = g.member_paths;
    json keys = json::array();
    for (const auto& k : g.merged_points.keys) keys.push_back(json::array({k[0], k[1], k[2]}));
    jg["voxels"] = std::move(keys);
    jg["aabb"] = {{"min", {g.aabb.min.x, g.aabb.min.y, g.aabb.min.z}},
                  {"max", {g.aabb.max.x, g.aabb.max.y, g.aabb.max.z}}};
    jg["centroid"] = {g.centroid.x, g.centroid.y, g.centroid.z};
    jgroups.push_back(std::move(jg));
  }
  doc["groups"] = std::move(jgroups);
  return doc.dump();
}

std::vector<MeshGroup> groups_from_json(const std::string& text, double* pitch_out) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw SchemaVersionMismatch("groups document is not valid JSON");
  if (doc.value("schema", "") != "cadgraph/1")
    throw SchemaVersionMismatch("unsupported groups schema");
  const double pitch = doc.value("pitch", 0.01);
  if (pitch_out) *pitch_out = pitch;
  std::vector<MeshGroup> groups;
  for (const auto& jg : doc["groups"]) {
    MeshGroup g;
    g.id = jg["id"].get<int>();
    g.representative_path = jg["representative"].get<std::string>();
    for (const auto& m : jg["members"]) g.member_paths.push_back(m.get<std::string>());
    g.merged_points.grid_pitch = pitch;
    g.merged_points.source_mesh = g.representative_path;
    for (const auto& k : jg["voxels"])
      g.merged_points.keys.push_back(
          {k[0].get<std::int64_t>(), k[1].get<std::int64_t>(), k[2].get<std::int64_t>()});
    const auto& jb = jg["aabb"];
    g.aabb.min = {jb["min"][0], jb["min"][1], jb["min"][2]};
    g.aabb.max = {jb["max"][0], jb["max"][1], jb["max"][2]};
    g.centroid = {jg["centroid"][0], jg["centroid"][1], jg["centroid"][2]};
    groups.push_back(std::move(g));
  }
  return groups;
}

std::string clusters_to_json(const Clustering& clustering,
                             const std::vector<std::pair<int, int>>& adjacency) {
  json doc;
  doc["schema"] = "cadgraph/1";
  doc["epsilon"] = clustering.epsilon;
  doc["min_samples"] = clustering.min_samples;
  doc["labels"] = clustering.labels;
  json pairs = json::array();
  for (const auto& [a, b] : adjacency) pairs.push_back(json::array({a, b}));
  doc["adjacency"] = std::move(pairs);
  return doc.dump();
}

void clusters_from_json(const std::string& text, Clustering* clustering,
                        std::vector<std::pair<int, int>>* adjacency) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw SchemaVersionMismatch("clusters document is not valid JSON");
  if (doc.value("schema", "") != "cadgraph/1")
    throw SchemaVersionMismatch("unsupported clusters schema");
  if (clustering) {
    clustering->epsilon = doc.value("epsilon", 0.01);
    clustering->min_samples = doc.value("min_samples", 1);
    clustering->labels = doc["labels"].get<std::vector<int>>();
  }
  if (adjacency) {
    adjacency->clear();
    for (const auto& jp : doc["adjacency"])
      adjacency->emplace_back(jp[0].get<int>(), jp[1].get<int>());
  }
}

// -------------------------------------------------------------- run-all ----

namespace {

std::uint32_t file_crc32(const std::string& file) {
  const std::string data = read_text_file(file);
  return static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

}  // namespace

RunAllResult run_all(const PipelineConfig& config, const std::string& input_file,
                     SceneFormat format, const std::string& input_units) {
  config.validate();
  const std::string out = config.output_dir;
  std::filesystem::create_directories(out);

  std::ofstream log(out + "/run_log.jsonl", std::ios::binary);
  const auto t_start = std::chrono::steady_clock::now();
  auto log_stage = [&](const std::string& stage, const json& counters) {
    const auto now = std::chrono::steady_clock::now();
    json line;
    line["stage"] = stage;
    line["elapsed_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now - t_start).count();
    line["counters"] = counters;
    log << line.dump() << "\n";
    log.flush();
  };

  RunAllResult result;
  result.output_dir = out;

  // ingest
  Scene scene = load_scene(input_file, format, input_units);
  ExclusionReport exclusions;
  scene = apply_exclusions(scene, config.exclude_patterns, config.ground_patterns, &exclusions);
  save_scene(scene, out + "/scene.json");
  result.stats = scene_stats(scene);
  log_stage("ingest", {{"meshes", result.stats.mesh_count},
                       {"active", result.stats.active_count},
                       {"excluded_matched", exclusions.excluded_matched},
                       {"ground_matched", exclusions.ground_matched}});

  // preprocess: per-mesh surface point counts
  {
    json counts = json::object();
    for (const auto& mesh : scene.meshes) {
      if (!mesh.active()) continue;
      counts[mesh.path] =
          surface_points(mesh, config.voxel_pitch, config.fill_face_interiors).size();
    }
    write_text_file(out + "/points_report.json",
                    json{{"schema", "cadgraph/1"}, {"pitch", config.voxel_pitch},
                         {"surface_point_counts", counts}}
                        .dump(2));
    log_stage("preprocess", {{"meshes", counts.size()}});
  }

  // group
  GroupingParams grouping_params{config.volume_threshold, config.proximity_r_max,
                                 config.voxel_pitch, config.fill_face_interiors};
  GroupingReport grouping_report;
  result.groups = group_small_meshes(scene, grouping_params, &grouping_report);
  result.group_count = result.groups.size();
  write_text_file(out + "/groups.json", groups_to_json(result.groups, config.voxel_pitch));
  {
    json hist = json::object();
    for (const auto& [size, count] : grouping_report.merge_histogram)
      hist[std::to_string(size)] = count;
    log_stage("group", {{"groups", result.group_count},
                        {"small", grouping_report.small_count},
                        {"large", grouping_report.large_count},
                        {"merged", grouping_report.merged_count},
                        {"promoted", grouping_report.promoted_count},
                        {"merge_histogram", hist}});
  }

  // cluster
  const GridIndex grid = build_grid(result.groups, config.voxel_pitch);
  const SparseDistanceMap distances =
      pairwise_min_distances(result.groups, grid, config.distance_cutoff);
  result.clustering = dbscan(static_cast<int>(result.groups.size()), distances, config.epsilon,
                             config.min_samples);
  const auto adjacency = adjacency_pairs(distances, config.epsilon);
  result.cluster_count = result.clustering.cluster_count();
  write_text_file(out + "/clusters.json", clusters_to_json(result.clustering, adjacency));
  log_stage("cluster", {{"clusters", result.cluster_count},
                        {"distance_pairs", distances.entries.size()},
                        {"adjacency_pairs", adjacency.size()}});

  // label (before graph assembly so labels land on the nodes)
  std::map<std::string, SemanticLabel> labels;
  Vocabulary vocabulary;
  if (config.labeler.kind != "none") {
    if (!config.labeler.vocabulary_file.empty())
      vocabulary = load_vocabulary(config.labeler.vocabulary_file);
    SceneGraph unlabeled = build_scene_graph(result.groups, result.clustering, adjacency, {});
    LabelRun run;
    if (config.labeler.kind == "file") {
      FileLabeler labeler = FileLabeler::from_file(config.labeler.labels_file);
      run = label_scene(unlabeled, labeler, vocabulary, {config.labeler.max_attempts});
    } else {
      RemoteLabelerConfig remote;
      remote.endpoint = config.labeler.endpoint;
      remote.model = config.labeler.model;
      remote.api_key_env = config.labeler.api_key_env;
      remote.concurrency = config.labeler.concurrency;
      RemoteLabeler labeler(remote);
      run = label_scene(unlabeled, labeler, vocabulary, {config.labeler.max_attempts},
                        make_render_provider(scene));
    }
    labels = run.labels;
    vocabulary = run.vocabulary;
    result.label_failures = run.failures.size();
    save_label_table(labels, out + "/labels.json");
    write_text_file(out + "/vocabulary.json", vocabulary.to_json());
    log_stage("label",
              {{"labeled", labels.size()}, {"failures", result.label_failures}});
  }

  // graph
  result.graph = build_scene_graph(result.groups, result.clustering, adjacency, labels);
  write_text_file(out + "/graph.json", serialize(result.graph));
  write_text_file(out + "/graph.dot", export_dot(result.graph));
  log_stage("graph", {{"nodes", result.graph.nodes.size()},
                      {"edges", result.graph.edges.size()}});

  // functional
  std::set<std::string> functional_groups(config.functional_groups.begin(),
                                          config.functional_groups.end());
  std::set<std::string> pipe_groups(config.pipe_groups.begin(), config.pipe_groups.end());
  std::size_t unlabeled_nodes = 0;
  auto units = identify_functional_units(result.graph, functional_groups, &unlabeled_nodes);
  ExtractionStats stats;
  result.functional = extract_functional_relations(result.graph, semantic_map_of(result.graph),
                                                   pipe_groups, std::move(units), &stats);
  result.unit_count = result.functional.units.size();
  result.functional_edge_count = result.functional.edges.size();
  write_text_file(out + "/functional.json", functional_to_json(result.functional));
  write_text_file(out + "/functional.dot", functional_to_dot(result.functional));
  log_stage("functional", {{"units", result.unit_count},
                           {"edges", result.functional_edge_count},
                           {"outer_iterations", stats.outer_iterations},
                           {"claimed", stats.claimed_nodes},
                           {"unlabeled_nodes", unlabeled_nodes}});

  // manifest: config snapshot + input hash; timings stay in the log so the
  // artifact set is byte-stable across reruns.
  json manifest;
  manifest["schema"] = "cadgraph/1";
  manifest["config"] = json::parse(config.to_json());
  manifest["input"] = {{"file", input_file},
                       {"crc32", file_crc32(input_file)},
                       {"format", format == SceneFormat::Obj    ? "obj"
                                  : format == SceneFormat::Gltf ? "gltf"
                                                                : "json"}};
  manifest["counters"] = {{"meshes", result.stats.mesh_count},
                          {"active", result.stats.active_count},
                          {"groups", result.group_count},
                          {"clusters", result.cluster_count},
                          {"labeled", labels.size()},
                          {"label_failures", result.label_failures},
                          {"functional_units", result.unit_count},
                          {"functional_edges", result.functional_edge_count}};
  write_text_file(out + "/manifest.json", manifest.dump(2));
  log_stage("done", manifest["counters"]);
  return result;
}

}  // namespace cadgraph
