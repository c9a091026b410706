#pragma once

#include <stdexcept>
#include <string>

namespace qstl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a certified decision cannot be reached below the precision cap.
struct PrecisionExhausted : Error {
  using Error::Error;
};

// Algorithm-1 recursion passed its depth cap: the input likely violates the
// no-rational-root / square-free requirements (repeated or rational root).
struct DepthExceeded : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct IllConditioned : Error {
  using Error::Error;
};

struct ClusterAmbiguity : Error {
  using Error::Error;
};

struct RealnessViolation : Error {
  using Error::Error;
};

struct NormalizationAmbiguity : Error {
  using Error::Error;
};

struct ReconstructionFailure : Error {
  using Error::Error;
};

struct BasisUndetermined : Error {
  using Error::Error;
};

struct UnknownSignal : Error {
  using Error::Error;
};

struct InvalidGenerator : Error {
  using Error::Error;
};

struct SyntaxError : Error {
  SyntaxError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        pos(position) {}
  std::size_t pos;
};

struct MalformedInterval : Error {
  using Error::Error;
};

}  // namespace qstl
