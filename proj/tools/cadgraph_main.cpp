// cadgraph: converts triangle-mesh scenes of industrial environments into
// labeled, clustered scene graphs and extracts functional pipe-system graphs.
// Every subcommand reads and writes files, so stages can run independently.
#include <filesystem>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"
#include "cadgraph/evaluation.hpp"
#include "cadgraph/functional.hpp"
#include "cadgraph/labeling.hpp"
#include "cadgraph/pipeline.hpp"
#include "cadgraph/png_io.hpp"
#include "cadgraph/scene_io.hpp"
#include "cadgraph/synth.hpp"

using namespace cadgraph;
using nlohmann::json;

namespace {

PipelineConfig load_config_or_default(const std::string& config_file) {
  if (config_file.empty()) return {};
  return PipelineConfig::load(config_file);
}

Scene load_with_exclusions(const std::string& file, const PipelineConfig& config) {
  Scene scene = load_scene(file, SceneFormat::Json);
  return apply_exclusions(scene, config.exclude_patterns, config.ground_patterns, nullptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cadgraph: scene graphs and functional pipe-system graphs from CAD meshes"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "pipeline configuration JSON");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "load a scene and write the native JSON form");
  std::string in_file, in_format = "json", in_units = "m", out_file = "scene.json";
  std::vector<std::string> exclude_globs, ground_globs;
  ingest->add_option("--input", in_file, "input scene file")->required();
  ingest->add_option("--format", in_format, "obj|gltf|json");
  ingest->add_option("--units", in_units, "source units for obj/json (m|cm|mm)");
  ingest->add_option("--exclude", exclude_globs, "glob(s) of meshes to exclude");
  ingest->add_option("--ground", ground_globs, "glob(s) of ground-plane meshes");
  ingest->add_option("--out", out_file, "output scene JSON");

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "write per-mesh surface point counts");
  std::string pp_scene = "scene.json", pp_out = "points_report.json";
  double pp_pitch = 0.01;
  bool pp_fill = false;
  preprocess->add_option("--scene", pp_scene, "scene JSON");
  preprocess->add_option("--pitch", pp_pitch, "voxel pitch in meters");
  preprocess->add_flag("--fill-interiors", pp_fill, "also fill triangle interiors");
  preprocess->add_option("--out", pp_out, "report file");

  // group
  auto* group = app.add_subcommand("group", "merge small meshes into larger neighbors");
  std::string g_scene = "scene.json", g_out = "groups.json";
  double g_vthresh = 1e-6, g_rmax = 0.10, g_pitch = 0.01;
  group->add_option("--scene", g_scene, "scene JSON");
  group->add_option("--vthresh", g_vthresh, "volume threshold in m^3");
  group->add_option("--rmax", g_rmax, "max attach distance in meters");
  group->add_option("--pitch", g_pitch, "voxel pitch in meters");
  group->add_option("--out", g_out, "groups file");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "DBSCAN over group distances");
  std::string c_groups = "groups.json", c_out = "clusters.json";
  double c_epsilon = 0.01, c_cutoff = 0.05;
  int c_min_samples = 1;
  cluster->add_option("--groups", c_groups, "groups file");
  cluster->add_option("--epsilon", c_epsilon, "DBSCAN epsilon in meters");
  cluster->add_option("--min-samples", c_min_samples, "DBSCAN min_samples");
  cluster->add_option("--cutoff", c_cutoff, "sparse distance cutoff in meters");
  cluster->add_option("--out", c_out, "clusters file");

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "assemble the scene graph");
  std::string gr_groups = "groups.json", gr_clusters = "clusters.json", gr_labels,
              gr_out = "graph.json", gr_dot;
  graph_cmd->add_option("--groups", gr_groups, "groups file");
  graph_cmd->add_option("--clusters", gr_clusters, "clusters file");
  graph_cmd->add_option("--labels", gr_labels, "labels file (optional)");
  graph_cmd->add_option("--out", gr_out, "graph JSON");
  graph_cmd->add_option("--dot", gr_dot, "also write DOT");

  // render
  auto* render_cmd = app.add_subcommand("render", "render context/isolated view pairs");
  std::string r_scene = "scene.json", r_mesh, r_out_dir = "imgs";
  double r_fov_deg = 60.0, r_elevation = 30.0, r_distance_scale = 2.0, r_min_distance = 0.5;
  render_cmd->add_option("--scene", r_scene, "scene JSON");
  render_cmd->add_option("--mesh", r_mesh, "mesh path to portray")->required();
  render_cmd->add_option("--out-dir", r_out_dir, "output directory");
  render_cmd->add_option("--fov", r_fov_deg, "vertical field of view in degrees");
  render_cmd->add_option("--elevation", r_elevation, "camera elevation in degrees");
  render_cmd->add_option("--distance-scale", r_distance_scale, "distance in AABB diagonals");
  render_cmd->add_option("--min-distance", r_min_distance, "camera distance floor in meters");

  // label
  auto* label_cmd = app.add_subcommand("label", "assign semantic labels to graph nodes");
  std::string l_graph = "graph.json", l_labeler = "file", l_labels, l_vocab, l_endpoint,
              l_model = "gpt-4o", l_scene, l_out = "labels.json", l_vocab_out;
  int l_retries = 3;
  label_cmd->add_option("--graph", l_graph, "scene graph JSON");
  label_cmd->add_option("--labeler", l_labeler, "file|remote");
  label_cmd->add_option("--labels", l_labels, "file labeler: path->label table");
  label_cmd->add_option("--vocab", l_vocab, "vocabulary JSON");
  label_cmd->add_option("--endpoint", l_endpoint, "remote labeler endpoint URL");
  label_cmd->add_option("--model", l_model, "remote labeler model name");
  label_cmd->add_option("--scene", l_scene, "scene JSON (remote labeler renders)");
  label_cmd->add_option("--retries", l_retries, "attempts per mesh");
  label_cmd->add_option("--out", l_out, "labels output");
  label_cmd->add_option("--vocab-out", l_vocab_out, "write post-run vocabulary");

  // functional
  auto* func_cmd = app.add_subcommand("functional", "extract the functional graph");
  std::string f_graph = "graph.json", f_out = "functional.json", f_dot;
  std::string f_pipe_groups = "Pipe assembly";
  std::string f_unit_groups = "Valve assembly,Gauge,Tank,Pump Unit";
  func_cmd->add_option("--graph", f_graph, "scene graph JSON");
  func_cmd->add_option("--pipe-groups", f_pipe_groups, "comma-separated connector groups");
  func_cmd->add_option("--unit-groups", f_unit_groups, "comma-separated functional groups");
  func_cmd->add_option("--out", f_out, "functional graph JSON");
  func_cmd->add_option("--dot", f_dot, "also write DOT");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "accuracy and detection metrics");
  std::string e_pred, e_gt, e_units, e_out = "report.json";
  std::size_t e_fold = 25;
  eval_cmd->add_option("--pred", e_pred, "predicted labels")->required();
  eval_cmd->add_option("--gt", e_gt, "ground-truth labels")->required();
  eval_cmd->add_option("--units", e_units, "ground-truth units JSON (optional)");
  eval_cmd->add_option("--fold-threshold", e_fold, "distribution folding threshold");
  eval_cmd->add_option("--out", e_out, "report file");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate an oracle scene");
  std::string s_spec, s_case, s_out_dir = "case";
  synth_cmd->add_option("--spec", s_spec, "synth spec JSON");
  synth_cmd->add_option("--case", s_case, "bundled case name (see --list)");
  bool s_list = false;
  synth_cmd->add_flag("--list", s_list, "list bundled case names");
  synth_cmd->add_option("--out-dir", s_out_dir, "output directory");

  // run-all
  auto* run_cmd = app.add_subcommand("run-all", "run the whole pipeline");
  std::string ra_input, ra_format = "json", ra_units = "m", ra_out_dir;
  run_cmd->add_option("--input", ra_input, "input scene")->required();
  run_cmd->add_option("--format", ra_format, "obj|gltf|json");
  run_cmd->add_option("--units", ra_units, "source units for obj/json");
  run_cmd->add_option("--out-dir", ra_out_dir, "output directory (overrides config)");

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig config = load_config_or_default(config_file);

    if (*ingest) {
      ExclusionReport report;
      Scene scene = load_scene(in_file, scene_format_from_string(in_format), in_units);
      scene = apply_exclusions(scene, exclude_globs, ground_globs, &report);
      save_scene(scene, out_file);
      const SceneStats stats = scene_stats(scene);
      std::cout << "meshes " << stats.mesh_count << ", active " << stats.active_count
                << ", excluded matched " << report.excluded_matched << ", ground matched "
                << report.ground_matched << "\n";
    } else if (*preprocess) {
      const Scene scene = load_with_exclusions(pp_scene, config);
      json counts = json::object();
      std::size_t total = 0;
      for (const auto& mesh : scene.meshes) {
        if (!mesh.active()) continue;
        const std::size_t n = surface_points(mesh, pp_pitch, pp_fill).size();
        counts[mesh.path] = n;
        total += n;
      }
      write_text_file(pp_out, json{{"schema", "cadgraph/1"},
                                   {"pitch", pp_pitch},
                                   {"surface_point_counts", counts}}
                                  .dump(2));
      std::cout << "surface points " << total << " across " << counts.size() << " meshes\n";
    } else if (*group) {
      const Scene scene = load_with_exclusions(g_scene, config);
      GroupingReport report;
      const auto groups =
          group_small_meshes(scene, {g_vthresh, g_rmax, g_pitch, false}, &report);
      json doc = json::parse(groups_to_json(groups, g_pitch));
      json histogram = json::object();
      for (const auto& [size, count] : report.merge_histogram)
        histogram[std::to_string(size)] = count;
      doc["report"] = {{"group_count", groups.size()},
                       {"small", report.small_count},
                       {"large", report.large_count},
                       {"merged", report.merged_count},
                       {"promoted", report.promoted_count},
                       {"merge_histogram", std::move(histogram)}};
      write_text_file(g_out, doc.dump());
      std::cout << "groups " << groups.size() << " (small " << report.small_count << ", merged "
                << report.merged_count << ", promoted " << report.promoted_count << ")\n";
    } else if (*cluster) {
      const auto groups = groups_from_json(read_text_file(c_groups));
      const GridIndex grid = build_grid(groups, 0.01);
      const auto distances = pairwise_min_distances(groups, grid, c_cutoff);
      const Clustering clustering =
          dbscan(static_cast<int>(groups.size()), distances, c_epsilon, c_min_samples);
      write_text_file(c_out, clusters_to_json(clustering, adjacency_pairs(distances, c_epsilon)));
      std::cout << "clusters " << clustering.cluster_count() << "\n";
    } else if (*graph_cmd) {
      const auto groups = groups_from_json(read_text_file(gr_groups));
      Clustering clustering;
      std::vector<std::pair<int, int>> adjacency;
      clusters_from_json(read_text_file(gr_clusters), &clustering, &adjacency);
      std::map<std::string, SemanticLabel> labels;
      if (!gr_labels.empty()) labels = load_label_table(gr_labels);
      const SceneGraph graph = build_scene_graph(groups, clustering, adjacency, labels);
      write_text_file(gr_out, serialize(graph));
      if (!gr_dot.empty()) write_text_file(gr_dot, export_dot(graph));
      std::cout << "nodes " << graph.nodes.size() << ", edges " << graph.edges.size() << "\n";
    } else if (*render_cmd) {
      const Scene scene = scene_from_json(read_text_file(r_scene));
      const Mesh* mesh = scene.find(r_mesh);
      if (!mesh) throw UnreadableFile("mesh path not found: " + r_mesh);
      std::filesystem::create_directories(r_out_dir);
      std::set<std::string> all;
      for (const auto& m : scene.meshes)
        if (!m.excluded) all.insert(m.path);
      const PointSet points = surface_points(*mesh);
      ViewPlacement placement;
      placement.elevation_deg = r_elevation;
      placement.distance_scale = r_distance_scale;
      placement.min_distance = r_min_distance;
      auto views = default_views(aabb(*mesh), centroid(points), placement);
      for (auto& v : views) v.vertical_fov = r_fov_deg * M_PI / 180.0;
      for (std::size_t v = 0; v < views.size(); ++v) {
        write_png(r_out_dir + "/view" + std::to_string(v) + "_context.png",
                  render(scene, all, r_mesh, views[v]));
        write_png(r_out_dir + "/view" + std::to_string(v) + "_isolated.png",
                  render(scene, {r_mesh}, std::nullopt, views[v]));
      }
      std::cout << "wrote " << views.size() << " view pairs to " << r_out_dir << "\n";
    } else if (*label_cmd) {
      const SceneGraph graph = deserialize(read_text_file(l_graph));
      Vocabulary vocabulary;
      if (!l_vocab.empty()) vocabulary = load_vocabulary(l_vocab);
      LabelRun run;
      if (l_labeler == "file") {
        FileLabeler labeler = FileLabeler::from_file(l_labels);
        run = label_scene(graph, labeler, vocabulary, {l_retries});
      } else if (l_labeler == "remote") {
        RemoteLabelerConfig remote;
        remote.endpoint = l_endpoint;
        remote.model = l_model;
        RemoteLabeler labeler(remote);
        if (l_scene.empty()) throw ConfigError("remote labeling needs --scene for rendering");
        const Scene scene = scene_from_json(read_text_file(l_scene));
        run = label_scene(graph, labeler, vocabulary, {l_retries}, make_render_provider(scene));
      } else {
        throw ConfigError("unknown labeler '" + l_labeler + "'");
      }
      save_label_table(run.labels, l_out);
      if (!l_vocab_out.empty()) write_text_file(l_vocab_out, run.vocabulary.to_json());
      std::cout << "labeled " << run.labels.size() << ", failures " << run.failures.size() << "\n";
      for (const auto& failure : run.failures)
        std::cerr << "  failed: " << failure.mesh_path << ": " << failure.error << "\n";
    } else if (*func_cmd) {
      const SceneGraph graph = deserialize(read_text_file(f_graph));
      auto split = [](const std::string& csv) {
        std::set<std::string> out;
        std::size_t start = 0;
        while (start <= csv.size()) {
          const std::size_t comma = csv.find(',', start);
          const std::string item = csv.substr(start, comma - start);
          if (!item.empty()) out.insert(item);
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
        return out;
      };
      std::size_t unlabeled = 0;
      auto units = identify_functional_units(graph, split(f_unit_groups), &unlabeled);
      ExtractionStats stats;
      const FunctionalGraph fg = extract_functional_relations(
          graph, semantic_map_of(graph), split(f_pipe_groups), std::move(units), &stats);
      write_text_file(f_out, functional_to_json(fg));
      if (!f_dot.empty()) write_text_file(f_dot, functional_to_dot(fg));
      std::cout << "units " << fg.units.size() << ", edges " << fg.edges.size()
                << ", outer iterations " << stats.outer_iterations;
      if (unlabeled > 0) std::cout << " (warning: " << unlabeled << " unlabeled nodes ignored)";
      std::cout << "\n";
    } else if (*eval_cmd) {
      const auto pred = load_label_table(e_pred);
      const auto gt = load_label_table(e_gt);
      std::set<std::string> scope;
      for (const auto& [path, label] : gt) scope.insert(path);
      const AccuracyResult accuracy = label_accuracy(pred, gt, scope);
      std::map<std::string, DetectionCounts> detection;
      if (!e_units.empty()) {
        std::vector<GroundTruthUnit> units;
        const json doc = json::parse(read_text_file(e_units));
        for (const auto& ju : doc.at("units")) {
          GroundTruthUnit unit;
          unit.type = ju.at("type").get<std::string>();
          for (const auto& m : ju.at("meshes")) unit.mesh_paths.insert(m.get<std::string>());
          units.push_back(std::move(unit));
        }
        detection = unit_detection_report(pred, units);
      }
      const LabelDistribution distribution = label_distribution(pred, e_fold);
      write_text_file(e_out, evaluation_report_json(accuracy, detection, distribution));
      std::cout << "group accuracy " << format_percent(accuracy.group_accuracy)
                << ", name accuracy " << format_percent(accuracy.name_accuracy) << "\n";
    } else if (*synth_cmd) {
      if (s_list) {
        for (const auto& [name, spec] : bundled_suite()) std::cout << name << "\n";
        return 0;
      }
      SynthSpec spec;
      if (!s_spec.empty()) {
        spec = SynthSpec::load(s_spec);
      } else if (!s_case.empty()) {
        bool found = false;
        for (const auto& [name, bundled] : bundled_suite())
          if (name == s_case) {
            spec = bundled;
            found = true;
          }
        if (!found) throw ConfigError("unknown bundled case '" + s_case + "'");
      } else {
        throw ConfigError("synth needs --spec or --case");
      }
      const SynthCase c = generate(spec);
      save_synth_case(c, s_out_dir);
      std::cout << "meshes " << c.scene.meshes.size() << ", units "
                << c.gt_functional.units.size() << ", clusters " << c.gt_clusters.size() << "\n";
    } else if (*run_cmd) {
      if (!ra_out_dir.empty()) config.output_dir = ra_out_dir;
      const RunAllResult result =
          run_all(config, ra_input, scene_format_from_string(ra_format), ra_units);
      std::cout << "groups " << result.group_count << ", clusters " << result.cluster_count
                << ", units " << result.unit_count << ", functional edges "
                << result.functional_edge_count << ", label failures " << result.label_failures
                << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
