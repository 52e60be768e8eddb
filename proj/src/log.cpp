#include "varimove/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "varimove/errors.hpp"

namespace varimove {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveJacobian: return "NonPositiveJacobian";
    case ErrorKind::DeterminantBoundViolation: return "DeterminantBoundViolation";
    case ErrorKind::InadmissibleDeformation: return "InadmissibleDeformation";
    case ErrorKind::NegativeDensity: return "NegativeDensity";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::LineSearchStall: return "LineSearchStall";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::MeshQualityExhausted: return "MeshQualityExhausted";
    case ErrorKind::CollisionDetected: return "CollisionDetected";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::MeshFormat: return "MeshFormat";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

void init_logging() {
  static bool done = false;
  if (!done) {
    auto logger = spdlog::stderr_color_mt("varimove");
    logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    spdlog::set_default_logger(logger);
    done = true;
  }
  const char* env = std::getenv("VARIMOVE_LOG");
  const std::string level = env ? env : "warn";
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace varimove
