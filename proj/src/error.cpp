#include "phlab/error.hpp"

namespace phlab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::input: return "input";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::singularity: return "singularity";
    case ErrorCode::degeneracy: return "degeneracy";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::internal: return "internal";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
    case ErrorCode::budget: return "budget";
  }
  return "unknown";
}

}  // namespace phlab
