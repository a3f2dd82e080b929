#include "cadgraph/labeling.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cadgraph/errors.hpp"
#include "cadgraph/pipeline.hpp"
#include "cadgraph/png_io.hpp"

namespace cadgraph {

using nlohmann::json;

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::GroundTruth:
      return "GROUND_TRUTH";
    case Provenance::Model:
      return "MODEL";
    case Provenance::ProposedNew:
      return "PROPOSED_NEW";
  }
  return "MODEL";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "GROUND_TRUTH") return Provenance::GroundTruth;
  if (s == "PROPOSED_NEW") return Provenance::ProposedNew;
  return Provenance::Model;
}

// ---------------------------------------------------------- vocabulary ----

bool Vocabulary::contains(const std::string& group, const std::string& name) const {
  const auto it = groups_.find(group);
  if (it == groups_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), name) != it->second.end();
}

bool Vocabulary::has_group(const std::string& group) const { return groups_.contains(group); }

bool Vocabulary::extend(const std::string& group, const std::string& name) {
  if (group.empty() || name.empty())
    throw MalformedVocabulary("vocabulary entries must be non-empty strings");
  if (contains(group, name)) return false;
  groups_[group].push_back(name);
  return true;
}

std::size_t Vocabulary::name_count() const {
  std::size_t n = 0;
  for (const auto& [group, names] : groups_) n += names.size();
  return n;
}

std::string Vocabulary::to_json() const {
  json doc;
  doc["groups"] = json::object();
  for (const auto& [group, names] : groups_) doc["groups"][group] = names;
  return doc.dump();
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("groups") ||
      !doc["groups"].is_object())
    throw MalformedVocabulary("vocabulary must be a JSON object with a 'groups' map");
  Vocabulary v;
  for (const auto& [group, names] : doc["groups"].items()) {
    if (!names.is_array()) throw MalformedVocabulary("group '" + group + "' must list names");
    for (const auto& name : names) {
      const std::string n = name.get<std::string>();
      if (v.contains(group, n))
        throw MalformedVocabulary("duplicate name '" + n + "' under group '" + group + "'");
      v.extend(group, n);
    }
  }
  return v;
}

Vocabulary load_vocabulary(const std::string& file) {
  return Vocabulary::from_json(read_text_file(file));
}

Vocabulary extend_vocabulary(Vocabulary v, const std::string& group, const std::string& name) {
  v.extend(group, name);
  return v;
}

// ------------------------------------------------------------- request ----

std::string format_bbox_dims(const std::array<double, 3>& dims) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.3f x %.3f x %.3f", dims[0], dims[1], dims[2]);
  return buf;
}

namespace {

std::string base64_encode(const std::vector<std::uint8_t>& data) {
  static const char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    std::uint32_t chunk = data[i] << 16;
    if (i + 1 < data.size()) chunk |= data[i + 1] << 8;
    if (i + 2 < data.size()) chunk |= data[i + 2];
    out.push_back(table[(chunk >> 18) & 63]);
    out.push_back(table[(chunk >> 12) & 63]);
    out.push_back(i + 1 < data.size() ? table[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < data.size() ? table[chunk & 63] : '=');
  }
  return out;
}

std::string prompt_text(const LabelRequest& request) {
  std::ostringstream out;
  out << "You are labeling one mesh of an industrial CAD environment.\n"
      << "Its bounding box is " << format_bbox_dims(request.bbox_dims) << " meters.\n"
      << "Six rendered images follow as three pairs, each pair from one camera view: "
      << "first the full environment with the target mesh highlighted, "
      << "then the target mesh alone.\n"
      << "Pick a fitting 'group' and 'name' from this vocabulary, or propose a new pair "
      << "if none fits:\n"
      << request.vocabulary.to_json() << "\n"
      << "Answer with strict JSON only: {\"group\": \"...\", \"name\": \"...\", "
         "\"new_label\": false} (set new_label to true only for a proposed pair).";
  return out.str();
}

// Extracts the first balanced {...} block, string-aware.
std::string first_json_block(const std::string& text) {
  const std::size_t start = text.find('{');
  if (start == std::string::npos) return "";
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    if (c == '{') ++depth;
    if (c == '}' && --depth == 0) return text.substr(start, i - start + 1);
  }
  return "";
}

}  // namespace

nlohmann::json assemble_label_request(const LabelRequest& request, const std::string& model) {
  if (request.images.size() != 6)
    throw MissingImages("label request needs exactly 6 images, got " +
                        std::to_string(request.images.size()));
  for (const auto& image : request.images)
    if (image.width != 512 || image.height != 512)
      throw MissingImages("label request images must be 512x512");

  json content = json::array();
  content.push_back({{"type", "text"}, {"text", prompt_text(request)}});
  for (const auto& image : request.images) {
    content.push_back(
        {{"type", "image_url"},
         {"image_url", {{"url", "data:image/png;base64," + base64_encode(encode_png(image))}}}});
  }
  json payload;
  payload["model"] = model;
  payload["temperature"] = 0;
  payload["messages"] = json::array({{{"role", "user"}, {"content", std::move(content)}}});
  return payload;
}

SemanticLabel parse_label_response(const std::string& text, const Vocabulary& vocabulary) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    const std::string block = first_json_block(text);
    if (!block.empty()) doc = json::parse(block, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
      throw UnparseableResponse("no JSON object in response: " + text.substr(0, 120));
  }
  if (!doc.contains("group") || !doc.contains("name") || !doc["group"].is_string() ||
      !doc["name"].is_string())
    throw UnparseableResponse("response lacks string 'group'/'name' fields");

  SemanticLabel label;
  label.group = doc["group"].get<std::string>();
  label.name = doc["name"].get<std::string>();
  if (vocabulary.contains(label.group, label.name)) {
    label.provenance = Provenance::Model;
    return label;
  }
  if (doc.value("new_label", false)) {
    label.provenance = Provenance::ProposedNew;
    return label;
  }
  throw UnknownLabelWithoutProposal("label (" + label.group + ", " + label.name +
                                    ") is not in the vocabulary and was not proposed as new");
}

// ------------------------------------------------------------ labelers ----

LabelerResult FileLabeler::complete(const LabelRequest& request) {
  const auto it = table_.find(request.mesh_path);
  if (it == table_.end()) return {false, "", "no table entry for " + request.mesh_path};
  json reply;
  reply["group"] = it->second.group;
  reply["name"] = it->second.name;
  reply["new_label"] = !request.vocabulary.contains(it->second.group, it->second.name);
  return {true, reply.dump(), ""};
}

FileLabeler FileLabeler::from_file(const std::string& file) {
  return FileLabeler(load_label_table(file));
}

std::map<std::string, SemanticLabel> load_label_table(const std::string& file) {
  json doc = json::parse(read_text_file(file), nullptr, false);
  if (doc.is_discarded()) throw UnreadableFile("label table is not valid JSON: " + file);
  if (doc.contains("labels")) doc = doc["labels"];
  std::map<std::string, SemanticLabel> table;
  for (const auto& [path, entry] : doc.items()) {
    SemanticLabel label;
    label.group = entry.at("group").get<std::string>();
    label.name = entry.at("name").get<std::string>();
    if (entry.contains("provenance"))
      label.provenance = provenance_from_string(entry["provenance"].get<std::string>());
    table.emplace(path, std::move(label));
  }
  return table;
}

void save_label_table(const std::map<std::string, SemanticLabel>& labels,
                      const std::string& file) {
  json doc = json::object();
  for (const auto& [path, label] : labels)
    doc[path] = {{"group", label.group},
                 {"name", label.name},
                 {"provenance", to_string(label.provenance)}};
  write_text_file(file, json{{"labels", doc}}.dump());
}

RemoteLabeler::RemoteLabeler(RemoteLabelerConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("remote labeler needs an endpoint URL");
}

LabelerResult RemoteLabeler::complete(const LabelRequest& request) {
  const std::size_t scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) return {false, "", "endpoint must include a scheme"};
  const std::size_t path_start = config_.endpoint.find('/', scheme + 3);
  const std::string base = config_.endpoint.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

  httplib::Client client(base);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  const json payload = assemble_label_request(request, config_.model);
  const auto res = client.Post(path, headers, payload.dump(), "application/json");
  if (!res) return {false, "", "transport error: " + httplib::to_string(res.error())};
  if (res->status != 200)
    return {false, "", "http status " + std::to_string(res->status) + ": " + res->body};
  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) return {false, "", "response body is not JSON"};
  try {
    return {true, doc.at("choices").at(0).at("message").at("content").get<std::string>(), ""};
  } catch (const json::exception& e) {
    return {false, "", std::string("unexpected completion shape: ") + e.what()};
  }
}

// ----------------------------------------------------------- label run ----

LabelRun label_scene(const SceneGraph& graph, Labeler& labeler, const Vocabulary& vocabulary,
                     const RetryPolicy& retry, const ImageProvider& images) {
  std::vector<const Node*> nodes;
  for (const auto& [id, node] : graph.nodes)
    if (node.kind == NodeKind::Mesh) nodes.push_back(&node);
  std::sort(nodes.begin(), nodes.end(),
            [](const Node* a, const Node* b) { return a->path < b->path; });

  if (labeler.needs_images() && !images)
    throw MissingImages("labeler '" + labeler.name() + "' needs an image provider");

  struct Slot {
    bool ok = false;
    SemanticLabel label;
    std::string error;
  };
  std::vector<Slot> slots(nodes.size());

  auto work = [&](std::size_t i) {
    const Node& node = *nodes[i];
    LabelRequest request;
    request.mesh_path = node.path;
    const Vec3 e = node.aabb.extents();
    request.bbox_dims = {e.x, e.y, e.z};
    request.vocabulary = vocabulary;
    if (labeler.needs_images()) request.images = images(node);

    std::string last_error = "no attempts made";
    for (int attempt = 0; attempt < std::max(1, retry.max_attempts); ++attempt) {
      const LabelerResult res = labeler.complete(request);
      if (!res.ok) {
        last_error = res.error;
        continue;
      }
      try {
        slots[i].label = parse_label_response(res.response_text, vocabulary);
        slots[i].ok = true;
        return;
      } catch (const Error& e) {
        last_error = e.what();
      }
    }
    slots[i].error = last_error;
  };

  const int concurrency =
      std::max(1, std::min<int>(labeler.max_concurrency(), static_cast<int>(nodes.size())));
  if (concurrency == 1) {
    for (std::size_t i = 0; i < nodes.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < concurrency; ++t)
      workers.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < nodes.size(); i = next.fetch_add(1)) work(i);
      });
    for (auto& w : workers) w.join();
  }

  // Deterministic merge: results and vocabulary admissions in mesh-path order.
  LabelRun run;
  run.vocabulary = vocabulary;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!slots[i].ok) {
      run.failures.push_back({nodes[i]->path, slots[i].error});
      continue;
    }
    SemanticLabel label = slots[i].label;
    if (!run.vocabulary.contains(label.group, label.name))
      run.vocabulary.extend(label.group, label.name);
    if (labeler.provenance() == Provenance::GroundTruth)
      label.provenance = Provenance::GroundTruth;
    run.labels.emplace(nodes[i]->path, std::move(label));
  }
  return run;
}

ImageProvider make_render_provider(const Scene& scene) {
  auto all_paths = std::make_shared<std::set<std::string>>();
  for (const auto& mesh : scene.meshes)
    if (!mesh.excluded) all_paths->insert(mesh.path);
  return [&scene, all_paths](const Node& node) {
    std::set<std::string> isolated(node.member_paths.begin(), node.member_paths.end());
    if (isolated.empty()) isolated.insert(node.path);
    std::vector<Image> out;
    for (const CameraView& view : default_views(node.aabb, node.centroid)) {
      out.push_back(render(scene, *all_paths, node.path, view));
      out.push_back(render(scene, isolated, std::nullopt, view));
    }
    return out;
  };
}

}  // namespace cadgraph
