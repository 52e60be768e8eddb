#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace varimove {

enum class ErrorKind {
  NonPositiveJacobian,
  DeterminantBoundViolation,
  InadmissibleDeformation,
  NegativeDensity,
  SolverFailure,
  LineSearchStall,
  MaxIterations,
  MeshQualityExhausted,
  CollisionDetected,
  ConfigInvalid,
  MeshFormat,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace varimove
