#pragma once

#include <stdexcept>
#include <string>

namespace cadgraph {

// Base class for everything this library throws on its own behalf.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnreadableFile : Error {
  using Error::Error;
};
struct MalformedGeometry : Error {
  using Error::Error;
};
struct UnitMismatch : Error {
  using Error::Error;
};
struct EmptyMesh : Error {
  using Error::Error;
};
struct EmptyPointSet : Error {
  using Error::Error;
};
struct EpsilonExceedsCutoff : Error {
  using Error::Error;
};
struct UnknownGroupInAdjacency : Error {
  using Error::Error;
};
struct SchemaVersionMismatch : Error {
  using Error::Error;
};
struct UnknownSelector : Error {
  using Error::Error;
};
struct MalformedVocabulary : Error {
  using Error::Error;
};
struct MissingImages : Error {
  using Error::Error;
};
struct UnparseableResponse : Error {
  using Error::Error;
};
struct UnknownLabelWithoutProposal : Error {
  using Error::Error;
};
struct LabelingFailed : Error {
  using Error::Error;
};
struct OverlappingUnits : Error {
  using Error::Error;
};
struct EmptyScope : Error {
  using Error::Error;
};
struct InvalidSpec : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace cadgraph
