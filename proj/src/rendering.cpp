#include "cadgraph/rendering.hpp"

#include <algorithm>
#include <cmath>

#include "cadgraph/errors.hpp"

namespace cadgraph {

namespace {

constexpr double kNearPlane = 1e-3;
const Vec3 kLightDirection = normalized({0.4, 0.25, 0.88});

struct ViewVertex {
  Vec3 view;  // camera space, +z forward
};

// Clips a triangle against the near plane; returns 0..4 vertices.
std::vector<Vec3> clip_near(const Vec3& a, const Vec3& b, const Vec3& c) {
  const std::array<Vec3, 3> in{a, b, c};
  std::vector<Vec3> out;
  for (int i = 0; i < 3; ++i) {
    const Vec3& cur = in[i];
    const Vec3& nxt = in[(i + 1) % 3];
    const bool cur_in = cur.z >= kNearPlane;
    const bool nxt_in = nxt.z >= kNearPlane;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double t = (kNearPlane - cur.z) / (nxt.z - cur.z);
      out.push_back(lerp(cur, nxt, t));
    }
  }
  return out;
}

}  // namespace

Image Image::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = r;
  rgb[i + 1] = g;
  rgb[i + 2] = b;
}

std::array<std::uint8_t, 3> Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

std::vector<CameraView> default_views(const Box3& aabb, const Vec3& centroid,
                                      const ViewPlacement& placement) {
  const Vec3 center = aabb.center();
  const double distance =
      std::max(placement.min_distance, placement.distance_scale * aabb.diagonal());
  const double elevation = placement.elevation_deg * M_PI / 180.0;
  std::vector<CameraView> views;
  for (double azimuth_deg : {0.0, 120.0, 240.0}) {
    const double azimuth = azimuth_deg * M_PI / 180.0;
    CameraView view;
    view.eye = center + Vec3{std::cos(elevation) * std::cos(azimuth),
                             std::cos(elevation) * std::sin(azimuth),
                             std::sin(elevation)} *
                            distance;
    view.target = centroid;
    views.push_back(view);
  }
  return views;
}

Image render(const Scene& scene, const std::set<std::string>& visible,
             const std::optional<std::string>& highlight, const CameraView& view,
             const RenderStyle& style, bool* nothing_visible) {
  if (visible.empty()) throw Error("render needs a non-empty visible set");
  const int w = view.width;
  const int h = view.height;
  Image img = Image::filled(w, h, style.background[0], style.background[1], style.background[2]);
  std::vector<double> inv_depth(static_cast<std::size_t>(w) * h, 0.0);

  // Camera basis, +z looks from eye toward target.
  const Vec3 forward = normalized(view.target - view.eye);
  Vec3 up = view.up;
  if (std::abs(dot(forward, normalized(up))) > 0.999) up = {0.0, 1.0, 0.0};
  const Vec3 right = normalized(cross(forward, up));
  const Vec3 true_up = cross(right, forward);
  const double half = std::tan(view.vertical_fov / 2.0);
  const double aspect = static_cast<double>(w) / h;

  bool any_pixel = false;
  auto raster_triangle = [&](const Vec3& va, const Vec3& vb, const Vec3& vc,
                             const std::array<std::uint8_t, 3>& color) {
    // Project to screen, keep 1/z for the depth test.
    auto project = [&](const Vec3& v) {
      const double inv_z = 1.0 / v.z;
      const double x_ndc = v.x * inv_z / (half * aspect);
      const double y_ndc = v.y * inv_z / half;
      return Vec3{(x_ndc * 0.5 + 0.5) * w, (0.5 - y_ndc * 0.5) * h, inv_z};
    };
    const Vec3 a = project(va), b = project(vb), c = project(vc);
    const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (area == 0.0) return;
    const double inv_area = 1.0 / area;

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        const double py = y + 0.5;
        const double w0 = ((b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)) * inv_area;
        const double w1 = ((c.x - b.x) * (py - b.y) - (c.y - b.y) * (px - b.x)) * inv_area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        // Barycentric weights: w1 belongs to a, w2 to b, w0 to c.
        const double depth = w1 * a.z + w2 * b.z + w0 * c.z;
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        if (depth <= inv_depth[idx]) continue;
        inv_depth[idx] = depth;
        img.set(x, y, color[0], color[1], color[2]);
        any_pixel = true;
      }
    }
  };

  for (const auto& mesh : scene.meshes) {
    if (!visible.contains(mesh.path)) continue;
    std::array<std::uint8_t, 3> base = style.base_color;
    if (highlight && mesh.path == *highlight) {
      for (int i = 0; i < 3; ++i)
        base[i] = static_cast<std::uint8_t>(std::lround(
            base[i] * (1.0 - style.highlight_mix) + style.highlight_color[i] * style.highlight_mix));
    }
    for (const auto& face : mesh.faces) {
      const Vec3& wa = mesh.vertices[face[0]];
      const Vec3& wb = mesh.vertices[face[1]];
      const Vec3& wc = mesh.vertices[face[2]];
      const Vec3 normal = normalized(cross(wb - wa, wc - wa));
      const double shade = 0.35 + 0.65 * std::abs(dot(normal, kLightDirection));
      std::array<std::uint8_t, 3> color;
      for (int i = 0; i < 3; ++i)
        color[i] = static_cast<std::uint8_t>(
            std::min<long>(255, std::lround(static_cast<double>(base[i]) * shade)));

      auto to_view = [&](const Vec3& p) {
        const Vec3 d = p - view.eye;
        return Vec3{dot(right, d), dot(true_up, d), dot(forward, d)};
      };
      const auto poly = clip_near(to_view(wa), to_view(wb), to_view(wc));
      for (std::size_t i = 1; i + 1 < poly.size(); ++i)
        raster_triangle(poly[0], poly[i], poly[i + 1], color);
    }
  }
  if (nothing_visible) *nothing_visible = !any_pixel;
  return img;
}

}  // namespace cadgraph
