#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mbgeom {

using Coords = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Failure classes raised by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
  kMissingEmbedding,
  kPointOutsideDomain,
  kRankDeficient,
  kDimensionMismatch,
  kBasePointMismatch,
  kInvalidSection,
  kSingularMetric,
  kIndexOutOfRange,
  kBoundaryClearance,
  kTrajectoryExitsDomain,
  kChartMismatch,
  kCoarseGrid,
  kDegenerateGrid,
  kUnknownDescriptor,
};

const char* to_string(ErrorKind kind);

class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mbgeom
