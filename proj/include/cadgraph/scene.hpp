#pragma once

#include <array>
#include <string>
#include <vector>

#include "cadgraph/geom.hpp"

namespace cadgraph {

// A triangle mesh with a hierarchical identity path ("/area2/pipe_017").
// Coordinates are meters once a Scene is constructed.
struct Mesh {
  std::string path;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  bool excluded = false;
  bool is_ground = false;

  bool active() const { return !excluded && !is_ground; }
};

// Immutable after construction. Meshes are kept sorted by path so every
// downstream iteration order is reproducible.
struct Scene {
  std::vector<Mesh> meshes;
  std::string units = "m";

  const Mesh* find(const std::string& path) const;
};

struct SceneStats {
  std::size_t mesh_count = 0;
  std::size_t active_count = 0;
  std::size_t excluded_count = 0;
  std::size_t ground_count = 0;
  std::size_t vertex_total = 0;
  std::size_t face_total = 0;
  Box3 bounds;  // zeros for an empty scene
};

}  // namespace cadgraph
