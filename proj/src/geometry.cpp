#include "cadgraph/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "cadgraph/errors.hpp"

namespace cadgraph {

namespace {

void require_pitch(double pitch) {
  if (!(pitch > 0.0)) throw Error("pitch must be positive");
}

void require_vertices(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw EmptyMesh("mesh has no vertices: " + mesh.path);
}

PointSet finish(std::vector<VoxelKey> keys, const std::string& source, double pitch) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  PointSet out;
  out.keys = std::move(keys);
  out.source_mesh = source;
  out.grid_pitch = pitch;
  return out;
}

// Points along one edge: ceil(L/spacing)+1 evenly spaced, endpoints included.
void sample_edge(const Vec3& a, const Vec3& b, double spacing, std::vector<VoxelKey>& out) {
  const double len = distance(a, b);
  const int steps = len > 0.0 ? static_cast<int>(std::ceil(len / spacing)) : 0;
  for (int i = 0; i <= steps; ++i) {
    const double t = steps == 0 ? 0.0 : static_cast<double>(i) / steps;
    out.push_back(voxel_key_of(lerp(a, b, t), spacing));
  }
}

}  // namespace

std::vector<Vec3> PointSet::points() const {
  std::vector<Vec3> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(voxel_center(k, grid_pitch));
  return out;
}

PointSet voxelize_vertices(const Mesh& mesh, double pitch) {
  require_pitch(pitch);
  require_vertices(mesh);
  std::vector<VoxelKey> keys;
  keys.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) keys.push_back(voxel_key_of(v, pitch));
  return finish(std::move(keys), mesh.path, pitch);
}

PointSet sample_face_edges(const Mesh& mesh, double spacing) {
  require_pitch(spacing);
  require_vertices(mesh);
  std::vector<VoxelKey> keys;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    sample_edge(a, b, spacing, keys);
    sample_edge(b, c, spacing, keys);
    sample_edge(c, a, spacing, keys);
  }
  return finish(std::move(keys), mesh.path, spacing);
}

PointSet surface_points(const Mesh& mesh, double pitch, bool fill_interiors) {
  require_pitch(pitch);
  require_vertices(mesh);
  std::vector<VoxelKey> keys;
  for (const auto& v : mesh.vertices) keys.push_back(voxel_key_of(v, pitch));
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    sample_edge(a, b, pitch, keys);
    sample_edge(b, c, pitch, keys);
    sample_edge(c, a, pitch, keys);
    if (fill_interiors) {
      // Barycentric fill: rows of points between edge ab and c.
      const int rows = static_cast<int>(
          std::ceil(std::max({distance(a, c), distance(b, c), distance(a, b)}) / pitch));
      for (int i = 1; i < rows; ++i) {
        const double u = static_cast<double>(i) / rows;
        sample_edge(lerp(a, c, u), lerp(b, c, u), pitch, keys);
      }
    }
  }
  return finish(std::move(keys), mesh.path, pitch);
}

Box3 aabb(const Mesh& mesh) {
  require_vertices(mesh);
  Box3 box = Box3::empty_init();
  for (const auto& v : mesh.vertices) box.expand(v);
  return box;
}

Vec3 centroid(const PointSet& points) {
  if (points.empty()) throw EmptyPointSet("centroid of empty point set: " + points.source_mesh);
  Vec3 sum;
  for (std::size_t i = 0; i < points.size(); ++i) sum += points.point(i);
  return sum / static_cast<double>(points.size());
}

double volume_proxy(const Box3& box, double pitch) {
  require_pitch(pitch);
  const Vec3 e = box.extents();
  const double x = e.x > 0.0 ? e.x : pitch;
  const double y = e.y > 0.0 ? e.y : pitch;
  const double z = e.z > 0.0 ? e.z : pitch;
  return x * y * z;
}

PointSet merge_point_sets(const std::vector<const PointSet*>& sets, const std::string& source) {
  std::vector<VoxelKey> keys;
  double pitch = 0.01;
  for (const PointSet* s : sets) {
    pitch = s->grid_pitch;
    keys.insert(keys.end(), s->keys.begin(), s->keys.end());
  }
  return finish(std::move(keys), source, pitch);
}

}  // namespace cadgraph
