// Semantic labeling: the three-layer vocabulary, the six-image request
// contract, pluggable labelers (file table, remote vision-language endpoint)
// and admission of newly proposed labels.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cadgraph/labels.hpp"
#include "cadgraph/rendering.hpp"
#include "cadgraph/scene_graph.hpp"

namespace cadgraph {

// Three-level tree: root -> groups -> names. The root carries no data.
class Vocabulary {
 public:
  Vocabulary() = default;

  bool contains(const std::string& group, const std::string& name) const;
  bool has_group(const std::string& group) const;
  // Appends; duplicates are a no-op. Returns true when something was added.
  bool extend(const std::string& group, const std::string& name);
  const std::map<std::string, std::vector<std::string>>& groups() const { return groups_; }
  std::size_t group_count() const { return groups_.size(); }
  std::size_t name_count() const;

  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);

 private:
  std::map<std::string, std::vector<std::string>> groups_;
};

Vocabulary load_vocabulary(const std::string& file);
Vocabulary extend_vocabulary(Vocabulary v, const std::string& group, const std::string& name);

// Exactly three context/isolated pairs at 512x512 plus the mesh's bounding
// box dimensions and a vocabulary snapshot.
struct LabelRequest {
  std::string mesh_path;
  std::array<double, 3> bbox_dims{};
  std::vector<Image> images;  // pair 1 context, pair 1 isolated, pair 2 context, ...
  Vocabulary vocabulary;
};

std::string format_bbox_dims(const std::array<double, 3>& dims);  // "0.300 x 0.300 x 0.020"

// Validates the request (six images, 512x512) and produces the wire payload:
// a chat-completion body with six base64 PNG parts, the bounding box text,
// the serialized vocabulary and the strict-JSON answer instruction.
nlohmann::json assemble_label_request(const LabelRequest& request, const std::string& model);

// Strict JSON parse with one repair pass (first balanced {...} block).
SemanticLabel parse_label_response(const std::string& text, const Vocabulary& vocabulary);

struct LabelerResult {
  bool ok = false;
  std::string response_text;
  std::string error;
};

class Labeler {
 public:
  virtual ~Labeler() = default;
  virtual std::string name() const = 0;
  virtual Provenance provenance() const = 0;
  virtual bool needs_images() const { return false; }
  virtual int max_concurrency() const { return 1; }
  virtual LabelerResult complete(const LabelRequest& request) = 0;
};

// Offline labeler backed by a path -> {group,name} table. Responds with the
// same strict JSON a remote model is asked for, so the parse path is shared.
class FileLabeler : public Labeler {
 public:
  explicit FileLabeler(std::map<std::string, SemanticLabel> table) : table_(std::move(table)) {}
  static FileLabeler from_file(const std::string& file);

  std::string name() const override { return "file"; }
  Provenance provenance() const override { return Provenance::GroundTruth; }
  LabelerResult complete(const LabelRequest& request) override;

 private:
  std::map<std::string, SemanticLabel> table_;
};

std::map<std::string, SemanticLabel> load_label_table(const std::string& file);
void save_label_table(const std::map<std::string, SemanticLabel>& labels, const std::string& file);

struct RemoteLabelerConfig {
  std::string endpoint;  // e.g. http://host:port/v1/chat/completions
  std::string model = "gpt-4o";
  std::string api_key_env = "CADGRAPH_API_KEY";
  int timeout_seconds = 60;
  int concurrency = 4;
};

// JSON-over-HTTP chat-completion client. Temperature is fixed at 0.
class RemoteLabeler : public Labeler {
 public:
  explicit RemoteLabeler(RemoteLabelerConfig config);

  std::string name() const override { return "remote"; }
  Provenance provenance() const override { return Provenance::Model; }
  bool needs_images() const override { return true; }
  int max_concurrency() const override { return config_.concurrency; }
  LabelerResult complete(const LabelRequest& request) override;

 private:
  RemoteLabelerConfig config_;
};

struct RetryPolicy {
  int max_attempts = 3;
};

struct LabelFailure {
  std::string mesh_path;
  std::string error;
};

struct LabelRun {
  std::map<std::string, SemanticLabel> labels;  // mesh path -> label
  std::vector<LabelFailure> failures;
  Vocabulary vocabulary;  // input vocabulary plus admitted proposals
};

// Provides the six images for one mesh node (3 views x context/isolated).
using ImageProvider = std::function<std::vector<Image>(const Node&)>;

// Labels every mesh node of the graph. Proposed-new labels are admitted into
// the vocabulary in mesh-path order, so the final vocabulary is independent
// of request concurrency. Per-mesh failures are collected, not fatal.
LabelRun label_scene(const SceneGraph& graph, Labeler& labeler, const Vocabulary& vocabulary,
                     const RetryPolicy& retry = {}, const ImageProvider& images = nullptr);

// Image provider rendering default views of each node against a scene.
ImageProvider make_render_provider(const Scene& scene);

}  // namespace cadgraph
