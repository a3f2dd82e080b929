// Small vector/box types shared by every module. Plain structs, double
// precision, no external math library.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace cadgraph {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Vec3& a, const Vec3& b) { return length(a - b); }

inline Vec3 normalized(const Vec3& a) {
  const double n = length(a);
  return n > 0.0 ? a / n : Vec3{};
}

inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) {
  return {a.x * (1.0 - t) + b.x * t, a.y * (1.0 - t) + b.y * t, a.z * (1.0 - t) + b.z * t};
}

// Axis-aligned bounding box, min <= max component-wise.
struct Box3 {
  Vec3 min;
  Vec3 max;

  void expand(const Vec3& p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    min.z = std::min(min.z, p.z);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
    max.z = std::max(max.z, p.z);
  }

  void merge(const Box3& o) {
    expand(o.min);
    expand(o.max);
  }

  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extents() const { return max - min; }
  double diagonal() const { return distance(min, max); }

  static Box3 empty_init() {
    constexpr double inf = 1e300;
    return {{inf, inf, inf}, {-inf, -inf, -inf}};
  }
};

inline bool contains(const Box3& b, const Vec3& p, double slack = 0.0) {
  return p.x >= b.min.x - slack && p.x <= b.max.x + slack && p.y >= b.min.y - slack &&
         p.y <= b.max.y + slack && p.z >= b.min.z - slack && p.z <= b.max.z + slack;
}

}  // namespace cadgraph
