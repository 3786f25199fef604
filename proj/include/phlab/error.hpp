#pragma once

#include <stdexcept>
#include <string>

namespace phlab {

// Numeric values are part of the C ABI (see phlab.h); do not renumber.
enum class ErrorCode : int {
  input = 1,
  convergence = 2,
  singularity = 3,
  degeneracy = 4,
  numerical = 5,
  internal = 6,
  io = 7,
  config = 8,
  budget = 9,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

// Literal messages: no string is built on the success path.
inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) throw Error(code, what);
}

}  // namespace phlab
