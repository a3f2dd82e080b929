#pragma once

#include <string>

namespace cadgraph {

enum class Provenance { GroundTruth, Model, ProposedNew };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// A (group, name) pair from the three-layer vocabulary.
struct SemanticLabel {
  std::string group;
  std::string name;
  Provenance provenance = Provenance::GroundTruth;

  bool operator==(const SemanticLabel& o) const { return group == o.group && name == o.name; }
};

}  // namespace cadgraph
