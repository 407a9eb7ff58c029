#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdn {

enum class ErrorKind {
  ParseError,
  NonTriangular,
  IndexOutOfRange,
  DegenerateFace,
  IsolatedVertex,
  NoEdges,
  InsufficientNeighbors,
  DegenerateMeanNormal,
  ZeroVector,
  TooFewSamples,
  EmptyInput,
  LengthMismatch,
  ShapeMismatch,
  NonFiniteActivation,
  DomainError,
  NonFiniteGradient,
  EmptyTrainingSet,
  EmptyNeighborhood,
  ZeroAccumulator,
  EmptyMesh,
  ConnectivityMismatch,
  ConfigMismatch,
  CorruptModel,
  VersionMismatch,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mdn
