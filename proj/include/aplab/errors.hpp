#pragma once

#include <stdexcept>
#include <string>

namespace aplab {

/// Dimension mismatch between operands (matmul, forward, mask congruence).
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed on-disk data: bad magic, version, truncation.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Semantically invalid input (label out of range, empty subset, ...).
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration; message names the offending key.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aplab
