#include "cadgraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"
#include "cadgraph/geometry.hpp"
#include "cadgraph/pipeline.hpp"
#include "cadgraph/scene_io.hpp"

namespace cadgraph {

using nlohmann::json;

namespace {

// Parts overlap their neighbors along the shared axis by this much.
constexpr double kOverlap = 0.004;
// Pipe gaps shorter than this hold no segment; the flanking bodies meet.
constexpr double kMinPipeGap = 0.02;

constexpr double kValveSpan = 0.08;
constexpr double kGaugeSpan = 0.06;
constexpr double kTankHalf = 0.25;

struct Frame {
  Vec3 dir, n1, n2;
};

Frame frame_of(const Vec3& direction) {
  const Vec3 d = normalized(direction);
  const Vec3 up_hint = std::abs(d.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  const Vec3 n1 = normalized(cross(up_hint, d));
  return {d, n1, cross(d, n1)};
}

// Appends a closed box (8 vertices, 12 triangles) to a mesh.
//
// Contact rule used throughout this generator: two parts are guaranteed to
// be within one voxel after snapping only when they carry congruent box
// sections overlapping along a common axis, because then their corner edges
// lie on the same lines and edge samples land in the same voxel columns.
void add_box(Mesh& mesh, const Vec3& center, const Frame& f, double half_d, double half_1,
             double half_2) {
  const int base = static_cast<int>(mesh.vertices.size());
  for (int i = 0; i < 8; ++i) {
    const double sd = (i & 1) ? half_d : -half_d;
    const double s1 = (i & 2) ? half_1 : -half_1;
    const double s2 = (i & 4) ? half_2 : -half_2;
    mesh.vertices.push_back(center + f.dir * sd + f.n1 * s1 + f.n2 * s2);
  }
  const int quads[6][4] = {{0, 2, 6, 4}, {1, 5, 7, 3}, {0, 4, 5, 1},
                           {2, 3, 7, 6}, {0, 1, 3, 2}, {4, 6, 7, 5}};
  for (const auto& q : quads) {
    mesh.faces.push_back({base + q[0], base + q[1], base + q[2]});
    mesh.faces.push_back({base + q[0], base + q[2], base + q[3]});
  }
}

Mesh make_box(const std::string& path, const Vec3& center, const Frame& f, double half_d,
              double half_1, double half_2) {
  Mesh mesh;
  mesh.path = path;
  add_box(mesh, center, f, half_d, half_1, half_2);
  return mesh;
}

struct Polyline {
  std::vector<Vec3> points;
  std::vector<double> cumulative;
  double length = 0.0;

  explicit Polyline(const std::vector<Vec3>& waypoints) : points(waypoints) {
    cumulative.push_back(0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
      length += distance(points[i - 1], points[i]);
      cumulative.push_back(length);
    }
  }

  Vec3 at(double s) const {
    s = std::clamp(s, 0.0, length);
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (s <= cumulative[i] || i + 1 == points.size()) {
        const double span = cumulative[i] - cumulative[i - 1];
        const double t = span > 0.0 ? (s - cumulative[i - 1]) / span : 0.0;
        return lerp(points[i - 1], points[i], t);
      }
    }
    return points.back();
  }

  Vec3 direction_at(double s) const {
    s = std::clamp(s, 0.0, length);
    for (std::size_t i = 1; i < points.size(); ++i)
      if (s <= cumulative[i] || i + 1 == points.size())
        return normalized(points[i] - points[i - 1]);
    return {1, 0, 0};
  }
};

struct Part {
  Mesh mesh;
  SemanticLabel label;
  int attachment = -1;  // owning attachment index, -1 for pipe segments
};

struct Blocked {
  double s0 = 0.0;
  double s1 = 0.0;
  int attachment = -1;
};

double attachment_span(AttachmentType type) {
  switch (type) {
    case AttachmentType::Valve:
      return kValveSpan;
    case AttachmentType::Gauge:
      return kGaugeSpan;
    case AttachmentType::Tank:
      return 2.0 * kTankHalf;
    default:
      return 0.0;
  }
}

bool is_functional(AttachmentType type) {
  return type == AttachmentType::Valve || type == AttachmentType::Gauge ||
         type == AttachmentType::Tank;
}

struct Builder {
  const SynthSpec& spec;
  std::vector<Polyline> lines;
  std::vector<Part> parts;
  std::vector<std::pair<int, int>> contacts;       // part index pairs
  std::vector<std::vector<int>> attachment_parts;  // attachment -> part indices
  std::vector<int> attachment_body;                // attachment -> body part index
  std::vector<std::vector<int>> chain_per_run;     // functional attachments in order
  std::mt19937_64 rng;

  explicit Builder(const SynthSpec& s) : spec(s), rng(s.seed) {
    for (const auto& run : spec.runs) lines.emplace_back(run.waypoints);
    attachment_parts.resize(spec.attachments.size());
    attachment_body.assign(spec.attachments.size(), -1);
    chain_per_run.resize(spec.runs.size());
  }

  int add_part(Mesh mesh, const std::string& group, const std::string& name, int attachment) {
    Part part;
    part.mesh = std::move(mesh);
    part.label = {group, name, Provenance::GroundTruth};
    part.attachment = attachment;
    parts.push_back(std::move(part));
    const int idx = static_cast<int>(parts.size()) - 1;
    if (attachment >= 0) attachment_parts[attachment].push_back(idx);
    return idx;
  }

  void touch(int a, int b) {
    if (a >= 0 && b >= 0 && a != b) contacts.emplace_back(a, b);
  }

  std::string attachment_dir(int index) const {
    const Attachment& a = spec.attachments[index];
    std::string kind;
    switch (a.type) {
      case AttachmentType::Valve: kind = "valve"; break;
      case AttachmentType::Gauge: kind = "gauge"; break;
      case AttachmentType::Tank: kind = "tank"; break;
      case AttachmentType::FlangePair: kind = "flange"; break;
      case AttachmentType::BoltCluster: kind = "bolts"; break;
    }
    return "/run" + std::to_string(a.run) + "/" + kind + std::to_string(index);
  }

  int emit_attachment_body(int index) {
    const Attachment& a = spec.attachments[index];
    const Polyline& line = lines[a.run];
    const double s = a.t * line.length;
    const Vec3 center = line.at(s);
    const Frame f = frame_of(line.direction_at(s));
    const std::string dir = attachment_dir(index);
    const double half_axis = attachment_span(a.type) / 2.0 + kOverlap;

    if (a.type == AttachmentType::Valve) {
      Mesh body_mesh = make_box(dir + "/body", center, f, half_axis, 0.05, 0.05);
      // Boss column the wheel plugs onto; its section matches the wheel's.
      add_box(body_mesh, center + f.n2 * 0.061, f, 0.02, 0.02, 0.015);
      const int body = add_part(std::move(body_mesh), "Valve assembly", "Gate valve", index);

      Mesh wheel_mesh = make_box(dir + "/wheel", center + f.n2 * 0.08, f, 0.035, 0.035, 0.008);
      add_box(wheel_mesh, center + f.n2 * 0.066, f, 0.02, 0.02, 0.01);
      const int wheel = add_part(std::move(wheel_mesh), "Valve assembly", "Valve wheel", index);
      touch(body, wheel);
      return body;
    }
    if (a.type == AttachmentType::Gauge) {
      Mesh stem_mesh = make_box(dir + "/stem", center, f, half_axis, 0.025, 0.025);
      add_box(stem_mesh, center + f.n2 * 0.036, f, 0.018, 0.018, 0.015);
      const int stem = add_part(std::move(stem_mesh), "Gauge", "Gauge stem", index);

      Mesh dial_mesh = make_box(dir + "/dial", center + f.n2 * 0.063, f, 0.035, 0.035, 0.012);
      add_box(dial_mesh, center + f.n2 * 0.043, f, 0.018, 0.018, 0.012);
      const int dial = add_part(std::move(dial_mesh), "Gauge", "Pressure gauge", index);
      touch(stem, dial);
      return stem;
    }
    return add_part(make_box(dir + "/body", center, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, kTankHalf,
                             kTankHalf, kTankHalf),
                    "Tank", "Storage tank", index);
  }

  // First arclength (marching from the chosen end) where the line leaves the
  // box; 1 mm resolution is plenty for the overlap margins used here.
  double exit_arclength(const Polyline& line, const Box3& box, bool from_start) const {
    const double step = 0.001;
    if (from_start) {
      for (double s = 0.0; s <= line.length; s += step)
        if (!contains(box, line.at(s))) return s;
      return line.length;
    }
    for (double s = line.length; s >= 0.0; s -= step)
      if (!contains(box, line.at(s))) return s;
    return 0.0;
  }

  void build_run(int run_index, const std::vector<int>& cut_attachments,
                 const std::vector<std::pair<bool, int>>& trims) {
    const Polyline& line = lines[run_index];
    const double radius = spec.runs[run_index].radius;

    std::vector<Blocked> blocks;
    for (int ai : cut_attachments) {
      const Attachment& a = spec.attachments[ai];
      const double c = a.t * line.length;
      const double half = attachment_span(a.type) / 2.0;
      blocks.push_back({std::max(0.0, c - half), std::min(line.length, c + half), ai});
    }
    for (const auto& [from_start, tank_attachment] : trims) {
      const Box3 box = aabb(parts[attachment_body[tank_attachment]].mesh);
      if (from_start)
        blocks.push_back({0.0, exit_arclength(line, box, true), tank_attachment});
      else
        blocks.push_back({exit_arclength(line, box, false), line.length, tank_attachment});
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const Blocked& a, const Blocked& b) { return a.s0 < b.s0; });
    for (std::size_t i = 1; i < blocks.size(); ++i) {
      if (blocks[i].s0 < blocks[i - 1].s1 - 1e-9)
        throw InvalidSpec("overlapping attachment spans on run " + std::to_string(run_index));
      // Sub-2cm gaps carry no pipe: extend both spans so the bodies meet.
      const double gap = blocks[i].s0 - blocks[i - 1].s1;
      if (gap > 1e-9 && gap < kMinPipeGap) {
        const double mid = (blocks[i].s0 + blocks[i - 1].s1) / 2.0;
        blocks[i - 1].s1 = mid;
        blocks[i].s0 = mid;
      }
    }

    struct Entity {
      int part = -1;
      int attachment = -1;
      double s0 = 0.0;
      double s1 = 0.0;
    };
    std::vector<Entity> track;
    int pipe_counter = 0;

    auto emit_pipes = [&](double g0, double g1) {
      if (g1 - g0 < kMinPipeGap) return;
      std::vector<double> cuts{g0};
      for (double w : line.cumulative)
        if (w > g0 + 1e-9 && w < g1 - 1e-9) cuts.push_back(w);
      cuts.push_back(g1);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const int pieces = std::max(
            1, static_cast<int>(std::ceil((cuts[i + 1] - cuts[i]) / spec.max_segment_length)));
        for (int p = 0; p < pieces; ++p) {
          const double s0 = cuts[i] + (cuts[i + 1] - cuts[i]) * p / pieces;
          const double s1 = cuts[i] + (cuts[i + 1] - cuts[i]) * (p + 1) / pieces;
          const double mid = (s0 + s1) / 2.0;
          const Frame f = frame_of(line.direction_at(mid));
          char name[40];
          std::snprintf(name, sizeof(name), "/run%d/seg%03d", run_index, pipe_counter++);
          const int part = add_part(
              make_box(name, line.at(mid), f, (s1 - s0) / 2.0 + kOverlap, radius, radius),
              "Pipe assembly", "Straight pipe", -1);
          track.push_back({part, -1, s0, s1});
        }
      }
    };

    double cursor = 0.0;
    for (const auto& block : blocks) {
      emit_pipes(cursor, block.s0);
      track.push_back({attachment_body[block.attachment], block.attachment, block.s0, block.s1});
      cursor = block.s1;
    }
    emit_pipes(cursor, line.length);

    std::sort(track.begin(), track.end(),
              [](const Entity& a, const Entity& b) { return a.s0 < b.s0; });

    // Junctions. Attachment bodies get a pipe-congruent collar reaching into
    // the neighboring segment; direction changes get an elbow piece carrying
    // one congruent stub per side.
    auto add_collar = [&](const Entity& entity, double s) {
      const Frame f = frame_of(line.direction_at(std::clamp(
          s + (s <= entity.s0 + 1e-9 ? 0.01 : -0.01), 0.0, line.length)));
      add_box(parts[entity.part].mesh, line.at(s), f, 0.03, radius, radius);
    };
    for (std::size_t i = 1; i < track.size(); ++i) {
      const Entity& prev = track[i - 1];
      const Entity& next = track[i];
      if (prev.attachment >= 0) add_collar(prev, prev.s1);
      if (next.attachment >= 0) add_collar(next, next.s0);
      if (prev.attachment < 0 && next.attachment < 0) {
        const Vec3 da = line.direction_at((prev.s0 + prev.s1) / 2.0);
        const Vec3 db = line.direction_at((next.s0 + next.s1) / 2.0);
        if (dot(da, db) < 1.0 - 1e-9) {
          char name[40];
          std::snprintf(name, sizeof(name), "/run%d/seg%03d", run_index, pipe_counter++);
          Mesh elbow;
          elbow.path = name;
          const double s = prev.s1;
          add_box(elbow, line.at(std::max(0.0, s - 0.012)), frame_of(da), 0.016, radius, radius);
          add_box(elbow, line.at(std::min(line.length, s + 0.012)), frame_of(db), 0.016, radius,
                  radius);
          const int part = add_part(std::move(elbow), "Pipe assembly", "Pipe elbow", -1);
          touch(prev.part, part);
          touch(part, next.part);
          continue;
        }
      }
      touch(prev.part, next.part);
    }

    for (const auto& entity : track)
      if (entity.attachment >= 0 && is_functional(spec.attachments[entity.attachment].type))
        chain_per_run[run_index].push_back(entity.attachment);

    // Riding attachments: flange pairs and bolt clusters sit on pipe pieces.
    for (std::size_t ai = 0; ai < spec.attachments.size(); ++ai) {
      const Attachment& a = spec.attachments[ai];
      if (a.run != run_index || is_functional(a.type)) continue;
      const double s = a.t * line.length;
      const Entity* host = nullptr;
      for (const auto& entity : track)
        if (entity.attachment < 0 && s >= entity.s0 && s <= entity.s1) host = &entity;
      if (!host)
        throw InvalidSpec("attachment " + std::to_string(ai) + " does not sit on a pipe segment");

      const Frame f = frame_of(line.direction_at(s));
      const std::string dir = attachment_dir(static_cast<int>(ai));
      if (a.type == AttachmentType::FlangePair) {
        for (int side = 0; side < 2; ++side) {
          const double offset = side == 0 ? -0.026 : 0.026;
          Mesh disc = make_box(dir + (side == 0 ? "/a" : "/b"), line.at(s + offset), f, 0.01,
                               0.055, 0.055);
          // Sleeve congruent with the pipe keeps the disc in sampling reach.
          add_box(disc, line.at(s + offset), f, 0.012, radius, radius);
          const int part =
              add_part(std::move(disc), "Connection Assembly", "Flange", static_cast<int>(ai));
          touch(part, host->part);
        }
      } else {
        // Bolts ride the pipe's corner edges, where the edge samples live.
        std::uniform_real_distribution<double> jitter(-0.002, 0.002);
        const double lo = host->s0 + 0.008;
        const double hi = std::max(lo, host->s1 - 0.008);
        for (int k = 0; k < std::max(1, a.count); ++k) {
          const double sign_1 = (k % 2) ? 1.0 : -1.0;
          const double sign_2 = ((k / 2) % 2) ? 1.0 : -1.0;
          const double axial =
              std::clamp(s + (k / 4 - a.count / 8) * 0.012 + jitter(rng), lo, hi);
          const Vec3 center =
              line.at(axial) + f.n1 * (radius * sign_1) + f.n2 * (radius * sign_2);
          char bolt_name[16];
          std::snprintf(bolt_name, sizeof(bolt_name), "/b%02d", k);
          const int part = add_part(make_box(dir + bolt_name, center, f, 0.004, 0.004, 0.004),
                                    "Connection Assembly", "Bolt", static_cast<int>(ai));
          touch(part, host->part);
        }
      }
    }
  }
};

int run_of_path(const std::string& path) {
  // "/run<k>/..."
  const std::size_t slash = path.find('/', 1);
  return std::stoi(path.substr(4, slash - 4));
}

}  // namespace

AttachmentType attachment_type_from_string(const std::string& s) {
  if (s == "valve") return AttachmentType::Valve;
  if (s == "gauge") return AttachmentType::Gauge;
  if (s == "tank") return AttachmentType::Tank;
  if (s == "flange_pair") return AttachmentType::FlangePair;
  if (s == "bolt_cluster") return AttachmentType::BoltCluster;
  throw InvalidSpec("unknown attachment type '" + s + "'");
}

std::string to_string(AttachmentType t) {
  switch (t) {
    case AttachmentType::Valve:
      return "valve";
    case AttachmentType::Gauge:
      return "gauge";
    case AttachmentType::Tank:
      return "tank";
    case AttachmentType::FlangePair:
      return "flange_pair";
    case AttachmentType::BoltCluster:
      return "bolt_cluster";
  }
  return "valve";
}

SynthCase generate(const SynthSpec& spec) {
  for (const auto& run : spec.runs) {
    if (run.waypoints.size() < 2) throw InvalidSpec("runs need at least two waypoints");
    if (!(run.radius > 0.0)) throw InvalidSpec("run radius must be positive");
  }
  for (const auto& a : spec.attachments) {
    if (a.run < 0 || a.run >= static_cast<int>(spec.runs.size()))
      throw InvalidSpec("attachment references missing run");
    if (a.t < 0.0 || a.t > 1.0) throw InvalidSpec("attachment t must be in [0, 1]");
  }
  if (!(spec.max_segment_length > 0.0)) throw InvalidSpec("max_segment_length must be positive");

  Builder b(spec);

  std::vector<std::vector<int>> cuts(spec.runs.size());
  for (std::size_t ai = 0; ai < spec.attachments.size(); ++ai) {
    if (!is_functional(spec.attachments[ai].type)) continue;
    b.attachment_body[ai] = b.emit_attachment_body(static_cast<int>(ai));
    cuts[spec.attachments[ai].run].push_back(static_cast<int>(ai));
  }
  std::vector<std::vector<std::pair<bool, int>>> trims(spec.runs.size());
  for (std::size_t ai = 0; ai < spec.attachments.size(); ++ai) {
    if (spec.attachments[ai].type != AttachmentType::Tank) continue;
    const Box3 box = aabb(b.parts[b.attachment_body[ai]].mesh);
    for (std::size_t r = 0; r < spec.runs.size(); ++r) {
      if (static_cast<int>(r) == spec.attachments[ai].run) continue;
      if (contains(box, b.lines[r].points.front()))
        trims[r].push_back({true, static_cast<int>(ai)});
      if (contains(box, b.lines[r].points.back()))
        trims[r].push_back({false, static_cast<int>(ai)});
    }
  }
  for (std::size_t r = 0; r < spec.runs.size(); ++r)
    b.build_run(static_cast<int>(r), cuts[r], trims[r]);

  // Functional units: one per attachment, merged when same-group bodies
  // touch directly.
  std::vector<int> unit_root(spec.attachments.size());
  std::iota(unit_root.begin(), unit_root.end(), 0);
  std::function<int(int)> find_unit = [&](int x) {
    while (unit_root[x] != x) x = unit_root[x] = unit_root[unit_root[x]];
    return x;
  };
  for (const auto& [pa, pb] : b.contacts) {
    const int aa = b.parts[pa].attachment;
    const int ab = b.parts[pb].attachment;
    if (aa < 0 || ab < 0 || aa == ab) continue;
    if (!is_functional(spec.attachments[aa].type) || !is_functional(spec.attachments[ab].type))
      continue;
    if (b.parts[pa].label.group != b.parts[pb].label.group) continue;
    const int ra = find_unit(aa), rb = find_unit(ab);
    if (ra != rb) unit_root[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::map<int, std::set<std::string>> unit_paths;
  std::map<int, std::string> unit_group;
  for (std::size_t ai = 0; ai < spec.attachments.size(); ++ai) {
    if (!is_functional(spec.attachments[ai].type)) continue;
    const int root = find_unit(static_cast<int>(ai));
    unit_group[root] = b.parts[b.attachment_body[ai]].label.group;
    for (int part : b.attachment_parts[ai]) unit_paths[root].insert(b.parts[part].mesh.path);
  }

  SynthCase result;
  result.vocabulary = synth_vocabulary();

  // Deterministic indexing: units ordered by their smallest mesh path.
  std::vector<std::pair<std::string, int>> unit_order;
  for (const auto& [root, paths] : unit_paths) unit_order.emplace_back(*paths.begin(), root);
  std::sort(unit_order.begin(), unit_order.end());
  std::map<int, int> unit_index;
  for (std::size_t i = 0; i < unit_order.size(); ++i) {
    const int root = unit_order[i].second;
    unit_index[root] = static_cast<int>(i) + 1;
    FunctionalUnit unit;
    unit.index = static_cast<int>(i) + 1;
    unit.unit_group = unit_group.at(root);
    result.gt_functional.units.push_back(std::move(unit));
    result.gt_units.push_back({unit_group.at(root), unit_paths.at(root)});
  }
  for (const auto& chain : b.chain_per_run) {
    for (std::size_t i = 1; i < chain.size(); ++i) {
      const int ua = unit_index.at(find_unit(chain[i - 1]));
      const int ub = unit_index.at(find_unit(chain[i]));
      if (ua != ub) result.gt_functional.edges.insert(std::minmax(ua, ub));
    }
  }

  // Clusters: contact-graph components, plus declared sub-epsilon contacts.
  const int n_parts = static_cast<int>(b.parts.size());
  std::vector<int> cluster_root(n_parts);
  std::iota(cluster_root.begin(), cluster_root.end(), 0);
  std::function<int(int)> find_cluster = [&](int x) {
    while (cluster_root[x] != x) x = cluster_root[x] = cluster_root[cluster_root[x]];
    return x;
  };
  auto unite = [&](int a, int c) {
    const int ra = find_cluster(a), rc = find_cluster(c);
    if (ra != rc) cluster_root[std::max(ra, rc)] = std::min(ra, rc);
  };
  for (const auto& [pa, pb] : b.contacts) unite(pa, pb);

  std::map<int, int> part_of_run;
  for (int p = 0; p < n_parts; ++p) part_of_run.emplace(run_of_path(b.parts[p].mesh.path), p);

  for (const auto& pair : spec.contact_pairs) {
    if (!part_of_run.contains(pair.run_a) || !part_of_run.contains(pair.run_b))
      throw InvalidSpec("contact pair references a run without geometry");
    unite(part_of_run.at(pair.run_a), part_of_run.at(pair.run_b));
  }

  for (const auto& gap : spec.gap_pairs) {
    if (!part_of_run.contains(gap.run_a) || !part_of_run.contains(gap.run_b))
      throw InvalidSpec("gap pair references a run without geometry");
    const int ca = find_cluster(part_of_run.at(gap.run_a));
    const int cb = find_cluster(part_of_run.at(gap.run_b));
    if (ca == cb) throw InvalidSpec("gap pair declared between connected structures");
    double min_gap = 1e300;
    for (int p = 0; p < n_parts; ++p) {
      if (find_cluster(p) != ca) continue;
      const Box3 box_a = aabb(b.parts[p].mesh);
      for (int q = 0; q < n_parts; ++q) {
        if (find_cluster(q) != cb) continue;
        const Box3 box_b = aabb(b.parts[q].mesh);
        const Vec3 g{std::max({0.0, box_a.min.x - box_b.max.x, box_b.min.x - box_a.max.x}),
                     std::max({0.0, box_a.min.y - box_b.max.y, box_b.min.y - box_a.max.y}),
                     std::max({0.0, box_a.min.z - box_b.max.z, box_b.min.z - box_a.max.z})};
        min_gap = std::min(min_gap, length(g));
      }
    }
    if (min_gap < gap.min_gap - 1e-9)
      throw InvalidSpec("declared gap pair is closer than its minimum gap");
  }

  std::map<int, std::set<std::string>> cluster_sets;
  for (int p = 0; p < n_parts; ++p) cluster_sets[find_cluster(p)].insert(b.parts[p].mesh.path);
  for (auto& [root, set] : cluster_sets) result.gt_clusters.push_back(std::move(set));
  std::sort(result.gt_clusters.begin(), result.gt_clusters.end(),
            [](const auto& a, const auto& c) { return *a.begin() < *c.begin(); });

  result.scene.units = "m";
  for (auto& part : b.parts) {
    result.gt_labels.emplace(part.mesh.path, part.label);
    result.scene.meshes.push_back(std::move(part.mesh));
  }
  std::sort(result.scene.meshes.begin(), result.scene.meshes.end(),
            [](const Mesh& a, const Mesh& c) { return a.path < c.path; });
  return result;
}

// ------------------------------------------------------------ spec I/O ----

std::string SynthSpec::to_json() const {
  json doc;
  doc["seed"] = seed;
  doc["max_segment_length"] = max_segment_length;
  json jruns = json::array();
  for (const auto& run : runs) {
    json jr;
    jr["radius"] = run.radius;
    json pts = json::array();
    for (const auto& p : run.waypoints) pts.push_back(json::array({p.x, p.y, p.z}));
    jr["waypoints"] = std::move(pts);
    jruns.push_back(std::move(jr));
  }
  doc["runs"] = std::move(jruns);
  json jatt = json::array();
  for (const auto& a : attachments) {
    json ja;
    ja["type"] = cadgraph::to_string(a.type);
    ja["run"] = a.run;
    ja["t"] = a.t;
    if (a.type == AttachmentType::BoltCluster) ja["count"] = a.count;
    jatt.push_back(std::move(ja));
  }
  doc["attachments"] = std::move(jatt);
  auto pairs_to_json = [](const std::vector<GapPair>& pairs) {
    json out = json::array();
    for (const auto& p : pairs)
      out.push_back({{"a", p.run_a}, {"b", p.run_b}, {"min_gap", p.min_gap}});
    return out;
  };
  doc["gap_pairs"] = pairs_to_json(gap_pairs);
  doc["contact_pairs"] = pairs_to_json(contact_pairs);
  return doc.dump(2);
}

SynthSpec SynthSpec::from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw InvalidSpec("synth spec is not valid JSON");
  SynthSpec spec;
  spec.seed = doc.value("seed", std::uint64_t{1});
  spec.max_segment_length = doc.value("max_segment_length", 0.3);
  for (const auto& jr : doc.value("runs", json::array())) {
    PipeRun run;
    run.radius = jr.value("radius", 0.03);
    for (const auto& jp : jr.value("waypoints", json::array()))
      run.waypoints.push_back({jp[0].get<double>(), jp[1].get<double>(), jp[2].get<double>()});
    spec.runs.push_back(std::move(run));
  }
  for (const auto& ja : doc.value("attachments", json::array())) {
    Attachment a;
    a.type = attachment_type_from_string(ja.at("type").get<std::string>());
    a.run = ja.value("run", 0);
    a.t = ja.value("t", 0.5);
    a.count = ja.value("count", 8);
    spec.attachments.push_back(a);
  }
  auto pairs_from_json = [](const json& arr) {
    std::vector<GapPair> out;
    for (const auto& jp : arr)
      out.push_back({jp.value("a", 0), jp.value("b", 0), jp.value("min_gap", 0.05)});
    return out;
  };
  spec.gap_pairs = pairs_from_json(doc.value("gap_pairs", json::array()));
  spec.contact_pairs = pairs_from_json(doc.value("contact_pairs", json::array()));
  return spec;
}

SynthSpec SynthSpec::load(const std::string& file) { return from_json(read_text_file(file)); }

void save_synth_case(const SynthCase& c, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  save_scene(c.scene, out_dir + "/scene.json");
  save_label_table(c.gt_labels, out_dir + "/gt_labels.json");

  json junits = json::array();
  for (const auto& unit : c.gt_units) {
    json ju;
    ju["type"] = unit.type;
    ju["meshes"] = unit.mesh_paths;
    junits.push_back(std::move(ju));
  }
  write_text_file(out_dir + "/gt_units.json", json{{"units", junits}}.dump(2));
  write_text_file(out_dir + "/gt_functional.json", functional_to_json(c.gt_functional));

  json jclusters = json::array();
  for (const auto& cluster : c.gt_clusters) jclusters.push_back(cluster);
  write_text_file(out_dir + "/gt_clusters.json", json{{"clusters", jclusters}}.dump(2));
  write_text_file(out_dir + "/vocabulary.json", c.vocabulary.to_json());
}

Vocabulary synth_vocabulary() {
  Vocabulary v;
  for (const auto& name : {"Straight pipe", "Pipe elbow", "Pipe segment"})
    v.extend("Pipe assembly", name);
  for (const auto& name : {"Gate valve", "Valve wheel", "Ball valve"})
    v.extend("Valve assembly", name);
  for (const auto& name : {"Pressure gauge", "Gauge stem"}) v.extend("Gauge", name);
  v.extend("Tank", "Storage tank");
  v.extend("Pump Unit", "Centrifugal pump");
  for (const auto& name : {"Flange", "Gasket", "Bolt"}) v.extend("Connection Assembly", name);
  for (const auto& name : {"Support beam", "Platform"}) v.extend("Structural", name);
  return v;
}

// ------------------------------------------------------- bundled cases ----

namespace {

// A small origin offset keeps box faces away from exact voxel boundaries.
const Vec3 kBase{0.0037, 0.0023, 0.1041};

}  // namespace

SynthSpec linear_chain_spec() {
  SynthSpec spec;
  spec.seed = 11;
  spec.runs.push_back({{kBase, kBase + Vec3{1.4, 0, 0}}, 0.03});
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.3});
  spec.attachments.push_back({AttachmentType::Gauge, 0, 0.7});
  return spec;
}

SynthSpec adjacent_gauges_spec() {
  SynthSpec spec;
  spec.seed = 12;
  spec.runs.push_back({{kBase, kBase + Vec3{1.6, 0, 0}}, 0.03});
  spec.attachments.push_back({AttachmentType::Gauge, 0, 0.42});
  spec.attachments.push_back({AttachmentType::Gauge, 0, 0.55});
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.85});
  return spec;
}

SynthSpec tank_star_spec() {
  SynthSpec spec;
  spec.seed = 13;
  const Vec3 hub = kBase + Vec3{0.0, 0.0, 0.2};
  spec.runs.push_back({{hub, hub + Vec3{1.1, 0, 0}}, 0.03});
  spec.runs.push_back({{hub, hub + Vec3{0, 1.1, 0}}, 0.03});
  spec.runs.push_back({{hub, hub + Vec3{-1.1, 0, 0}}, 0.03});
  spec.attachments.push_back({AttachmentType::Tank, 0, 0.0});
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.75});
  spec.attachments.push_back({AttachmentType::Valve, 1, 0.75});
  spec.attachments.push_back({AttachmentType::Valve, 2, 0.75});
  return spec;
}

SynthSpec disconnected_systems_spec() {
  SynthSpec spec;
  spec.seed = 14;
  spec.runs.push_back({{kBase, kBase + Vec3{1.2, 0, 0}}, 0.03});
  spec.runs.push_back({{kBase + Vec3{0, 0.8, 0}, kBase + Vec3{1.2, 0.8, 0}}, 0.03});
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.3});
  spec.attachments.push_back({AttachmentType::Gauge, 0, 0.7});
  spec.attachments.push_back({AttachmentType::Valve, 1, 0.5});
  spec.gap_pairs.push_back({0, 1, 0.3});
  return spec;
}

SynthSpec direct_contact_spec() {
  SynthSpec spec;
  spec.seed = 15;
  spec.runs.push_back({{kBase, kBase + Vec3{1.0, 0, 0}}, 0.03});
  // Spans [0.43, 0.51] and [0.515, 0.575]: a 5 mm gap, closed into contact.
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.47});
  spec.attachments.push_back({AttachmentType::Gauge, 0, 0.545});
  return spec;
}

SynthSpec contested_corridor_spec() {
  SynthSpec spec;
  spec.seed = 16;
  spec.runs.push_back({{kBase, kBase + Vec3{2.0, 0, 0}}, 0.03});
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.12});
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.88});
  return spec;
}

SynthSpec bolt_cluster_spec() {
  SynthSpec spec;
  spec.seed = 17;
  spec.runs.push_back({{kBase, kBase + Vec3{1.62, 0, 0}}, 0.03});
  spec.attachments.push_back({AttachmentType::Valve, 0, 0.5});
  spec.attachments.push_back({AttachmentType::FlangePair, 0, 0.2});
  Attachment bolts{AttachmentType::BoltCluster, 0, 0.65};
  bolts.count = 50;
  spec.attachments.push_back(bolts);
  return spec;
}

SynthSpec eps_boundary_merged_spec() {
  // Two parallel runs whose facing surfaces are 1.2 cm apart and snap to
  // adjacent voxel layers: the minimal distance comes out at exactly one
  // pitch, so the structures merge.
  SynthSpec spec;
  spec.seed = 18;
  const Vec3 a{0.0037, -0.0045, 0.1523};
  const Vec3 b{0.0037, 0.0675, 0.1523};
  spec.runs.push_back({{a, a + Vec3{0.8, 0, 0}}, 0.03});
  spec.runs.push_back({{b, b + Vec3{0.8, 0, 0}}, 0.03});
  spec.contact_pairs.push_back({0, 1, 0.0});
  return spec;
}

SynthSpec eps_boundary_separated_spec() {
  // The same 1.2 cm gap placed to snap two voxel layers apart: the minimal
  // distance is two pitches and the structures stay separate.
  SynthSpec spec;
  spec.seed = 19;
  const Vec3 a{0.0037, -0.001, 0.1523};
  const Vec3 b{0.0037, 0.071, 0.1523};
  spec.runs.push_back({{a, a + Vec3{0.8, 0, 0}}, 0.03});
  spec.runs.push_back({{b, b + Vec3{0.8, 0, 0}}, 0.03});
  spec.gap_pairs.push_back({0, 1, 0.012});
  return spec;
}

std::vector<std::pair<std::string, SynthSpec>> bundled_suite() {
  return {{"linear_chain", linear_chain_spec()},
          {"adjacent_gauges", adjacent_gauges_spec()},
          {"tank_star", tank_star_spec()},
          {"disconnected_systems", disconnected_systems_spec()},
          {"direct_contact", direct_contact_spec()},
          {"contested_corridor", contested_corridor_spec()},
          {"bolt_cluster", bolt_cluster_spec()},
          {"eps_boundary_merged", eps_boundary_merged_spec()},
          {"eps_boundary_separated", eps_boundary_separated_spec()}};
}

}  // namespace cadgraph
