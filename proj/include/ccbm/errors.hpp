#pragma once

#include <stdexcept>
#include <string>

namespace ccbm {

// Error taxonomy used across the library. The CLI maps these to exit codes:
// parse/validation -> 2, solver -> 3, mesh/geometry -> 4, stall -> 5.

struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& m) : std::runtime_error(m) {}
};

struct MeshingError : std::runtime_error {
  explicit MeshingError(const std::string& m) : std::runtime_error(m) {}
};

struct InvertedElementError : std::runtime_error {
  explicit InvertedElementError(const std::string& m) : std::runtime_error(m) {}
};

struct AssemblyError : std::runtime_error {
  explicit AssemblyError(const std::string& m) : std::runtime_error(m) {}
};

struct SingularMatrixError : std::runtime_error {
  explicit SingularMatrixError(const std::string& m) : std::runtime_error(m) {}
};

struct DegenerateGradientError : std::runtime_error {
  explicit DegenerateGradientError(const std::string& m) : std::runtime_error(m) {}
};

struct StallError : std::runtime_error {
  explicit StallError(const std::string& m) : std::runtime_error(m) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& m) : std::runtime_error(m) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace ccbm
