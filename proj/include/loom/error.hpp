#pragma once

#include <stdexcept>
#include <string>

namespace loom {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or too-small raster dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent parameters (e.g. angular mode without intrinsics).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated, or unreadable file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Geometry that admits no unique answer (parallel flow, FoE at infinity).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Scene definition that breaks its own invariants.
class SceneError : public Error {
 public:
  using Error::Error;
};

/// Two signals that do not correlate well enough to align.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace loom
