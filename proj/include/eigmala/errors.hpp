#pragma once

#include <stdexcept>
#include <string>

namespace eigmala {

struct DimensionMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown by householder_apply when v and w coincide; callers that build
// reflector chains substitute an identity factor instead.
struct DegenerateReflectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotOrthonormalError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotSymmetricError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A series with zero variance; ESS is undefined for it.
struct StuckChainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace eigmala
