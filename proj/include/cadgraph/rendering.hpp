// Deterministic software rasterizer for the labeling protocol's 512x512
// context/isolated image pairs. Perspective projection, z-buffer, flat
// shading; byte-identical output for identical input.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cadgraph/scene.hpp"

namespace cadgraph {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  static Image filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  std::array<std::uint8_t, 3> at(int x, int y) const;
  bool operator==(const Image& o) const {
    return width == o.width && height == o.height && rgb == o.rgb;
  }
};

struct CameraView {
  Vec3 eye;
  Vec3 target;
  Vec3 up{0.0, 0.0, 1.0};
  double vertical_fov = 1.0471975511965976;  // 60 degrees
  int width = 512;
  int height = 512;
};

struct ViewPlacement {
  double elevation_deg = 30.0;
  double distance_scale = 2.0;  // times the AABB diagonal
  double min_distance = 0.5;
};

// Three cameras at azimuths 0/120/240 degrees around the AABB center,
// aimed at the centroid.
std::vector<CameraView> default_views(const Box3& aabb, const Vec3& centroid,
                                      const ViewPlacement& placement = {});

struct RenderStyle {
  std::array<std::uint8_t, 3> background{64, 64, 64};
  std::array<std::uint8_t, 3> base_color{178, 182, 190};
  std::array<std::uint8_t, 3> highlight_color{220, 64, 48};
  double highlight_mix = 0.65;
};

// Renders the meshes whose paths are in `visible`; `highlight` tints one of
// them. If nothing lands in the frustum the background image is returned and
// *nothing_visible is set (a warning, not an error).
Image render(const Scene& scene, const std::set<std::string>& visible,
             const std::optional<std::string>& highlight, const CameraView& view,
             const RenderStyle& style = {}, bool* nothing_visible = nullptr);

}  // namespace cadgraph
