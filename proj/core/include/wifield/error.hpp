#pragma once

#include <stdexcept>
#include <string>

namespace wifield {

/// Invalid input: malformed files, out-of-range parameters, inconsistent shapes.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical stage failed: singular systems, non-convergence, divergence.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace wifield
