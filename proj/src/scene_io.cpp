#include "cadgraph/scene_io.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"

namespace cadgraph {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_vertex_finite(const Vec3& v, const std::string& path) {
  if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
    throw MalformedGeometry("non-finite vertex in " + path);
}

// Fan-triangulates a polygon given as indices into a vertex pool.
void emit_polygon(Mesh& mesh, const std::vector<int>& poly, const std::string& where) {
  if (poly.size() < 3) throw MalformedGeometry("face with fewer than 3 vertices in " + where);
  for (std::size_t i = 1; i + 1 < poly.size(); ++i)
    mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
}

void validate_faces(const Mesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  for (const auto& f : mesh.faces)
    for (int idx : f)
      if (idx < 0 || idx >= n)
        throw MalformedGeometry("face references missing vertex in " + mesh.path);
}

// Ensures path uniqueness for formats where names can collide (OBJ, glTF).
std::string unique_path(std::set<std::string>& used, std::string path) {
  if (used.insert(path).second) return path;
  for (int k = 2;; ++k) {
    std::string candidate = path + "~" + std::to_string(k);
    if (used.insert(candidate).second) return candidate;
  }
}

void finalize_scene(Scene& scene) {
  std::sort(scene.meshes.begin(), scene.meshes.end(),
            [](const Mesh& a, const Mesh& b) { return a.path < b.path; });
  for (const auto& m : scene.meshes) {
    validate_faces(m);
    for (const auto& v : m.vertices) check_vertex_finite(v, m.path);
  }
  scene.units = "m";
}

void scale_scene(Scene& scene, double scale) {
  if (scale == 1.0) return;
  for (auto& m : scene.meshes)
    for (auto& v : m.vertices) v = v * scale;
}

// ---------------------------------------------------------------- OBJ ----

Scene load_obj(const std::string& source, double scale) {
  std::istringstream in(read_file(source));
  std::vector<Vec3> global_vertices;
  Scene scene;
  std::set<std::string> used_paths;

  Mesh current;
  std::map<int, int> remap;  // global vertex index -> local index
  int unnamed_counter = 0;
  bool current_named = false;

  auto flush = [&]() {
    if (current.faces.empty()) {
      current = Mesh{};
      remap.clear();
      return;
    }
    if (!current_named) current.path = "/unnamed/" + std::to_string(unnamed_counter++);
    current.path = unique_path(used_paths, current.path);
    scene.meshes.push_back(std::move(current));
    current = Mesh{};
    remap.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) throw MalformedGeometry("bad vertex line: " + line);
      global_vertices.push_back(v);
    } else if (tag == "o" || tag == "g") {
      flush();
      std::string name;
      std::getline(ls, name);
      name.erase(0, name.find_first_not_of(" \t"));
      if (name.empty()) {
        current_named = false;
      } else {
        current_named = true;
        current.path = "/" + name;
      }
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string part;
      while (ls >> part) {
        // accept i, i/j, i//k, i/j/k
        const std::size_t slash = part.find('/');
        const std::string head = slash == std::string::npos ? part : part.substr(0, slash);
        int idx = 0;
        try {
          idx = std::stoi(head);
        } catch (const std::exception&) {
          throw MalformedGeometry("bad face index '" + part + "' in " + source);
        }
        if (idx < 0)
          idx = static_cast<int>(global_vertices.size()) + idx;  // relative
        else
          idx -= 1;  // OBJ is 1-based
        if (idx < 0 || idx >= static_cast<int>(global_vertices.size()))
          throw MalformedGeometry("face references missing vertex in " + source);
        auto [it, inserted] = remap.emplace(idx, static_cast<int>(current.vertices.size()));
        if (inserted) current.vertices.push_back(global_vertices[idx]);
        poly.push_back(it->second);
      }
      emit_polygon(current, poly, source);
    }
  }
  flush();
  scale_scene(scene, scale);
  finalize_scene(scene);
  return scene;
}

// --------------------------------------------------------------- glTF ----

struct Mat4 {
  // column-major, like glTF
  std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

  static Mat4 identity() { return {}; }

  Mat4 mul(const Mat4& o) const {
    Mat4 r;
    for (int c = 0; c < 4; ++c)
      for (int row = 0; row < 4; ++row) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += m[k * 4 + row] * o.m[c * 4 + k];
        r.m[c * 4 + row] = s;
      }
    return r;
  }

  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[4] * v.y + m[8] * v.z + m[12],
            m[1] * v.x + m[5] * v.y + m[9] * v.z + m[13],
            m[2] * v.x + m[6] * v.y + m[10] * v.z + m[14]};
  }
};

Mat4 trs_matrix(const json& node) {
  if (node.contains("matrix")) {
    Mat4 r;
    for (int i = 0; i < 16; ++i) r.m[i] = node["matrix"][i].get<double>();
    return r;
  }
  double tx = 0, ty = 0, tz = 0, sx = 1, sy = 1, sz = 1;
  double qx = 0, qy = 0, qz = 0, qw = 1;
  if (node.contains("translation")) {
    tx = node["translation"][0];
    ty = node["translation"][1];
    tz = node["translation"][2];
  }
  if (node.contains("rotation")) {
    qx = node["rotation"][0];
    qy = node["rotation"][1];
    qz = node["rotation"][2];
    qw = node["rotation"][3];
  }
  if (node.contains("scale")) {
    sx = node["scale"][0];
    sy = node["scale"][1];
    sz = node["scale"][2];
  }
  Mat4 r;
  const double xx = qx * qx, yy = qy * qy, zz = qz * qz;
  const double xy = qx * qy, xz = qx * qz, yz = qy * qz;
  const double wx = qw * qx, wy = qw * qy, wz = qw * qz;
  r.m[0] = (1 - 2 * (yy + zz)) * sx;
  r.m[1] = (2 * (xy + wz)) * sx;
  r.m[2] = (2 * (xz - wy)) * sx;
  r.m[4] = (2 * (xy - wz)) * sy;
  r.m[5] = (1 - 2 * (xx + zz)) * sy;
  r.m[6] = (2 * (yz + wx)) * sy;
  r.m[8] = (2 * (xz + wy)) * sz;
  r.m[9] = (2 * (yz - wx)) * sz;
  r.m[10] = (1 - 2 * (xx + yy)) * sz;
  r.m[12] = tx;
  r.m[13] = ty;
  r.m[14] = tz;
  return r;
}

std::vector<std::uint8_t> decode_base64(const std::string& text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  int acc = 0, bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = value(c);
    if (v < 0) throw MalformedGeometry("bad base64 data in glTF buffer");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

std::string dir_of(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

struct GltfBuffers {
  std::vector<std::vector<std::uint8_t>> data;
};

GltfBuffers load_gltf_buffers(const json& doc, const std::string& source,
                              const std::vector<std::uint8_t>& glb_bin) {
  GltfBuffers buffers;
  if (!doc.contains("buffers")) return buffers;
  for (const auto& b : doc["buffers"]) {
    if (!b.contains("uri")) {
      buffers.data.push_back(glb_bin);  // GLB binary chunk
      continue;
    }
    const std::string uri = b["uri"].get<std::string>();
    const std::string b64_marker = ";base64,";
    if (uri.rfind("data:", 0) == 0) {
      const std::size_t pos = uri.find(b64_marker);
      if (pos == std::string::npos) throw MalformedGeometry("unsupported data URI in " + source);
      buffers.data.push_back(decode_base64(uri.substr(pos + b64_marker.size())));
    } else {
      const std::string raw = read_file(dir_of(source) + "/" + uri);
      buffers.data.push_back(std::vector<std::uint8_t>(raw.begin(), raw.end()));
    }
  }
  return buffers;
}

struct AccessorView {
  const std::uint8_t* base = nullptr;
  std::size_t count = 0;
  std::size_t stride = 0;
  int component_type = 0;
};

AccessorView accessor_view(const json& doc, const GltfBuffers& buffers, int accessor_index,
                           std::size_t component_size, int components) {
  const json& acc = doc["accessors"][accessor_index];
  if (acc.contains("sparse")) throw MalformedGeometry("sparse accessors not supported");
  const json& view = doc["bufferViews"][acc["bufferView"].get<int>()];
  const auto& buf = buffers.data.at(view["buffer"].get<int>());
  const std::size_t view_offset = view.value("byteOffset", 0u);
  const std::size_t acc_offset = acc.value("byteOffset", 0u);
  AccessorView out;
  out.count = acc["count"].get<std::size_t>();
  out.component_type = acc["componentType"].get<int>();
  out.stride = view.value("byteStride", 0u);
  if (out.stride == 0) out.stride = component_size * components;
  const std::size_t need = view_offset + acc_offset + (out.count - 1) * out.stride +
                           component_size * components;
  if (out.count > 0 && need > buf.size()) throw MalformedGeometry("accessor out of buffer range");
  out.base = buf.data() + view_offset + acc_offset;
  return out;
}

Scene load_gltf(const std::string& source) {
  std::string raw = read_file(source);
  std::vector<std::uint8_t> glb_bin;
  json doc;
  if (raw.size() >= 12 && std::memcmp(raw.data(), "glTF", 4) == 0) {
    // GLB container: header, JSON chunk, optional BIN chunk.
    auto u32 = [&](std::size_t off) {
      std::uint32_t v;
      std::memcpy(&v, raw.data() + off, 4);
      return v;
    };
    std::size_t off = 12;
    std::string json_text;
    while (off + 8 <= raw.size()) {
      const std::uint32_t len = u32(off), type = u32(off + 4);
      if (off + 8 + len > raw.size()) throw MalformedGeometry("truncated GLB chunk");
      if (type == 0x4E4F534A)
        json_text.assign(raw.data() + off + 8, len);
      else if (type == 0x004E4942)
        glb_bin.assign(raw.begin() + off + 8, raw.begin() + off + 8 + len);
      off += 8 + len;
    }
    doc = json::parse(json_text, nullptr, false);
  } else {
    doc = json::parse(raw, nullptr, false);
  }
  if (doc.is_discarded()) throw MalformedGeometry("invalid glTF JSON in " + source);

  const GltfBuffers buffers = load_gltf_buffers(doc, source, glb_bin);
  Scene scene;
  std::set<std::string> used_paths;

  auto read_positions = [&](int accessor_index) {
    const AccessorView v = accessor_view(doc, buffers, accessor_index, 4, 3);
    if (v.component_type != 5126) throw MalformedGeometry("positions must be float");
    std::vector<Vec3> out(v.count);
    for (std::size_t i = 0; i < v.count; ++i) {
      float f[3];
      std::memcpy(f, v.base + i * v.stride, 12);
      out[i] = {f[0], f[1], f[2]};
    }
    return out;
  };

  auto read_indices = [&](int accessor_index) {
    const json& acc = doc["accessors"][accessor_index];
    const int ct = acc["componentType"].get<int>();
    const std::size_t size = ct == 5125 ? 4 : ct == 5123 ? 2 : 1;
    const AccessorView v = accessor_view(doc, buffers, accessor_index, size, 1);
    std::vector<int> out(v.count);
    for (std::size_t i = 0; i < v.count; ++i) {
      const std::uint8_t* p = v.base + i * v.stride;
      if (ct == 5125) {
        std::uint32_t x;
        std::memcpy(&x, p, 4);
        out[i] = static_cast<int>(x);
      } else if (ct == 5123) {
        std::uint16_t x;
        std::memcpy(&x, p, 2);
        out[i] = x;
      } else if (ct == 5121) {
        out[i] = *p;
      } else {
        throw MalformedGeometry("unsupported index component type");
      }
    }
    return out;
  };

  std::function<void(int, const Mat4&, const std::string&)> visit = [&](int node_index,
                                                                        const Mat4& parent,
                                                                        const std::string& prefix) {
    const json& node = doc["nodes"][node_index];
    const std::string segment =
        node.contains("name") ? node["name"].get<std::string>() : "node" + std::to_string(node_index);
    const std::string path = prefix + "/" + segment;
    const Mat4 world = parent.mul(trs_matrix(node));

    if (node.contains("mesh")) {
      const json& gmesh = doc["meshes"][node["mesh"].get<int>()];
      Mesh mesh;
      mesh.path = path;
      for (const auto& prim : gmesh["primitives"]) {
        if (prim.value("mode", 4) != 4)
          throw MalformedGeometry("non-triangle primitive in " + source);
        const int base = static_cast<int>(mesh.vertices.size());
        const auto positions = read_positions(prim["attributes"]["POSITION"].get<int>());
        for (const auto& p : positions) mesh.vertices.push_back(world.apply(p));
        std::vector<int> indices;
        if (prim.contains("indices")) {
          indices = read_indices(prim["indices"].get<int>());
        } else {
          indices.resize(positions.size());
          for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
        }
        if (indices.size() % 3 != 0) throw MalformedGeometry("triangle index count not divisible by 3");
        for (std::size_t i = 0; i + 2 < indices.size(); i += 3)
          mesh.faces.push_back({base + indices[i], base + indices[i + 1], base + indices[i + 2]});
      }
      if (!mesh.faces.empty()) {
        mesh.path = unique_path(used_paths, mesh.path);
        scene.meshes.push_back(std::move(mesh));
      }
    }
    if (node.contains("children"))
      for (const auto& child : node["children"]) visit(child.get<int>(), world, path);
  };

  if (doc.contains("scenes")) {
    const int scene_index = doc.value("scene", 0);
    for (const auto& root : doc["scenes"][scene_index]["nodes"])
      visit(root.get<int>(), Mat4::identity(), "");
  }
  finalize_scene(scene);
  return scene;
}

// --------------------------------------------------------------- JSON ----

Scene load_scene_json(const std::string& text, double default_scale) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw MalformedGeometry("invalid scene JSON");
  Scene scene;
  double scale = default_scale;
  if (doc.contains("units")) scale = unit_scale_to_meters(doc["units"].get<std::string>());
  std::set<std::string> used_paths;
  for (const auto& jm : doc.value("meshes", json::array())) {
    Mesh mesh;
    mesh.path = jm.at("path").get<std::string>();
    if (!used_paths.insert(mesh.path).second)
      throw MalformedGeometry("duplicate mesh path " + mesh.path);
    for (const auto& jv : jm.value("vertices", json::array()))
      mesh.vertices.push_back({jv[0].get<double>(), jv[1].get<double>(), jv[2].get<double>()});
    for (const auto& jf : jm.value("faces", json::array())) {
      std::vector<int> poly;
      for (const auto& ji : jf) poly.push_back(ji.get<int>());
      emit_polygon(mesh, poly, mesh.path);
    }
    mesh.excluded = jm.value("excluded", false);
    mesh.is_ground = jm.value("is_ground", false);
    scene.meshes.push_back(std::move(mesh));
  }
  scale_scene(scene, scale);
  finalize_scene(scene);
  return scene;
}

}  // namespace

double unit_scale_to_meters(const std::string& units) {
  if (units == "m" || units == "meters") return 1.0;
  if (units == "cm" || units == "centimeters") return 0.01;
  if (units == "mm" || units == "millimeters") return 0.001;
  throw UnitMismatch("cannot convert units '" + units + "' to meters");
}

bool glob_match(const std::string& pattern, const std::string& text) {
  return ::fnmatch(pattern.c_str(), text.c_str(), 0) == 0;
}

SceneFormat scene_format_from_string(const std::string& s) {
  if (s == "obj") return SceneFormat::Obj;
  if (s == "gltf" || s == "glb") return SceneFormat::Gltf;
  if (s == "json") return SceneFormat::Json;
  throw ConfigError("unknown scene format '" + s + "'");
}

const Mesh* Scene::find(const std::string& path) const {
  const auto it = std::lower_bound(meshes.begin(), meshes.end(), path,
                                   [](const Mesh& m, const std::string& p) { return m.path < p; });
  return it != meshes.end() && it->path == path ? &*it : nullptr;
}

Scene load_scene(const std::string& source, SceneFormat format, const std::string& units) {
  const double scale = unit_scale_to_meters(units);
  switch (format) {
    case SceneFormat::Obj:
      return load_obj(source, scale);
    case SceneFormat::Gltf:
      return load_gltf(source);  // meters by definition
    case SceneFormat::Json:
      return load_scene_json(read_file(source), scale);
  }
  throw ConfigError("unhandled scene format");
}

Scene apply_exclusions(Scene scene, const std::vector<std::string>& exclude_patterns,
                       const std::vector<std::string>& ground_patterns, ExclusionReport* report) {
  ExclusionReport local;
  for (auto& mesh : scene.meshes) {
    for (const auto& pattern : exclude_patterns) {
      if (glob_match(pattern, mesh.path)) {
        if (!mesh.excluded) ++local.excluded_matched;
        mesh.excluded = true;
        break;
      }
    }
    for (const auto& pattern : ground_patterns) {
      if (glob_match(pattern, mesh.path)) {
        if (!mesh.is_ground) ++local.ground_matched;
        mesh.is_ground = true;
        break;
      }
    }
  }
  if (report) *report = local;
  return scene;
}

SceneStats scene_stats(const Scene& scene) {
  SceneStats stats;
  stats.mesh_count = scene.meshes.size();
  Box3 bounds = Box3::empty_init();
  bool any_vertex = false;
  for (const auto& mesh : scene.meshes) {
    if (mesh.active()) ++stats.active_count;
    if (mesh.excluded) ++stats.excluded_count;
    if (mesh.is_ground) ++stats.ground_count;
    stats.vertex_total += mesh.vertices.size();
    stats.face_total += mesh.faces.size();
    for (const auto& v : mesh.vertices) {
      bounds.expand(v);
      any_vertex = true;
    }
  }
  stats.bounds = any_vertex ? bounds : Box3{};
  return stats;
}

std::string scene_to_json(const Scene& scene) {
  json doc;
  doc["units"] = scene.units;
  json meshes = json::array();
  for (const auto& mesh : scene.meshes) {
    json jm;
    jm["path"] = mesh.path;
    json verts = json::array();
    for (const auto& v : mesh.vertices) verts.push_back(json::array({v.x, v.y, v.z}));
    jm["vertices"] = std::move(verts);
    json faces = json::array();
    for (const auto& f : mesh.faces) faces.push_back(json::array({f[0], f[1], f[2]}));
    jm["faces"] = std::move(faces);
    if (mesh.excluded) jm["excluded"] = true;
    if (mesh.is_ground) jm["is_ground"] = true;
    meshes.push_back(std::move(jm));
  }
  doc["meshes"] = std::move(meshes);
  return doc.dump();
}

Scene scene_from_json(const std::string& text) { return load_scene_json(text, 1.0); }

void save_scene(const Scene& scene, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw UnreadableFile("cannot write " + file);
  out << scene_to_json(scene);
}

}  // namespace cadgraph
