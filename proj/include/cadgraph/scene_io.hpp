// Scene ingestion: OBJ, glTF and the native JSON scene format.
//
// All loaders normalize to the same Scene shape: meshes sorted by path,
// coordinates in meters, quads and larger polygons fan-triangulated.
#pragma once

#include <string>
#include <vector>

#include "cadgraph/scene.hpp"

namespace cadgraph {

enum class SceneFormat { Obj, Gltf, Json };

SceneFormat scene_format_from_string(const std::string& s);

// `units` applies to OBJ and JSON sources without their own declaration;
// glTF is meters by definition. Accepted: "m", "cm", "mm".
Scene load_scene(const std::string& source, SceneFormat format, const std::string& units = "m");

struct ExclusionReport {
  std::size_t excluded_matched = 0;
  std::size_t ground_matched = 0;
};

// Flags meshes whose path matches any glob; never removes meshes.
Scene apply_exclusions(Scene scene, const std::vector<std::string>& exclude_patterns,
                       const std::vector<std::string>& ground_patterns,
                       ExclusionReport* report = nullptr);

SceneStats scene_stats(const Scene& scene);

// Native JSON scene schema:
//   {"units":"m","meshes":[{"path":str,"vertices":[[x,y,z],...],"faces":[[i,j,k],...]}]}
// plus optional per-mesh "excluded"/"is_ground" flags.
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
void save_scene(const Scene& scene, const std::string& file);

// Conversion factor to meters, throws UnitMismatch for unknown units.
double unit_scale_to_meters(const std::string& units);

// Shell-style glob match used for exclusion/ground patterns.
bool glob_match(const std::string& pattern, const std::string& text);

}  // namespace cadgraph
