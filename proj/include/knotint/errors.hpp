#pragma once

#include <stdexcept>
#include <string>

namespace knotint {

struct InvalidEdge final : std::runtime_error {
  explicit InvalidEdge(const std::string& m) : std::runtime_error(m) {}
};
struct MixedVariant final : std::runtime_error {
  explicit MixedVariant(const std::string& m) : std::runtime_error(m) {}
};
struct SizeLimit final : std::runtime_error {
  explicit SizeLimit(const std::string& m) : std::runtime_error(m) {}
};
struct NotTrivalent final : std::runtime_error {
  explicit NotTrivalent(const std::string& m) : std::runtime_error(m) {}
};
struct CoincidentPoints final : std::runtime_error {
  explicit CoincidentPoints(const std::string& m) : std::runtime_error(m) {}
};
struct DimensionMismatch final : std::runtime_error {
  explicit DimensionMismatch(const std::string& m) : std::runtime_error(m) {}
};
struct DegreeMismatch final : std::runtime_error {
  explicit DegreeMismatch(const std::string& m) : std::runtime_error(m) {}
};
struct NotChordDiagram final : std::runtime_error {
  explicit NotChordDiagram(const std::string& m) : std::runtime_error(m) {}
};
struct CurvesIntersect final : std::runtime_error {
  explicit CurvesIntersect(const std::string& m) : std::runtime_error(m) {}
};
struct NotCocycle final : std::runtime_error {
  explicit NotCocycle(const std::string& m) : std::runtime_error(m) {}
};
struct UnknownAnomaly final : std::runtime_error {
  explicit UnknownAnomaly(const std::string& m) : std::runtime_error(m) {}
};
struct InsufficientSignal final : std::runtime_error {
  explicit InsufficientSignal(const std::string& m) : std::runtime_error(m) {}
};
struct ParseError final : std::runtime_error {
  explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};
struct EmbeddednessFailure final : std::runtime_error {
  explicit EmbeddednessFailure(const std::string& m) : std::runtime_error(m) {}
};
struct UnknownName final : std::runtime_error {
  explicit UnknownName(const std::string& m) : std::runtime_error(m) {}
};
struct DegenerateProjection final : std::runtime_error {
  explicit DegenerateProjection(const std::string& m) : std::runtime_error(m) {}
};
struct MalformedCode final : std::runtime_error {
  explicit MalformedCode(const std::string& m) : std::runtime_error(m) {}
};
struct IoError final : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace knotint
