#pragma once

#include "mbgeom/common.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mbgeom {

/// One coordinate axis of a chart domain. Periodic axes (longitudes, torus
/// angles) wrap modulo `upper - lower` and impose no boundary clearance.
struct AxisRange {
  double lower = 0.0;
  double upper = 1.0;
  bool periodic = false;

  double length() const { return upper - lower; }
};

using EmbeddingMap = std::function<Eigen::VectorXd(const Coords&)>;
using JacobianMap = std::function<Matrix(const Coords&)>;

/// A single coordinate patch: an axis-aligned box, optionally embedded in
/// ambient space. Built-in manifolds use one chart with a measure-zero seam.
struct Chart {
  std::string label;
  std::vector<AxisRange> domain;
  EmbeddingMap embedding;  // empty when the chart is abstract
  JacobianMap jacobian;    // empty => central finite differences

  int dim() const { return static_cast<int>(domain.size()); }
  bool has_embedding() const { return static_cast<bool>(embedding); }

  /// True when x lies inside the domain with at least `clearance` to every
  /// non-periodic face.
  bool interior(const Coords& x, double clearance = 0.0) const;

  /// Distance from x to the nearest non-periodic face (infinity if none).
  double boundary_distance(const Coords& x) const;

  /// Reduces periodic coordinates into [lower, upper).
  Coords wrap(const Coords& x) const;

  /// Coordinate difference b - a with periodic axes reduced to the shortest
  /// representative in [-period/2, period/2].
  Coords displacement(const Coords& a, const Coords& b) const;
};

void validate_chart(const Chart& chart);

inline constexpr double kDefaultFdStep = 1e-5;
inline constexpr double kRankFloor = 1e-8;

/// Embedding Jacobian (ambient x n). Uses the analytic map when present.
Matrix embedding_jacobian(const Chart& chart, const Coords& x, double h = kDefaultFdStep);

/// Central-difference Jacobian, ignoring any analytic Jacobian.
Matrix embedding_jacobian_fd(const Chart& chart, const Coords& x, double h = kDefaultFdStep);

/// Pullback metric J^T J of the embedding.
Matrix induced_metric(const Chart& chart, const Coords& x);

// ---------------------------------------------------------------------------
// Quadrature

enum class QuadratureScheme { kMidpoint, kGaussLegendre };

struct GridSpec {
  std::vector<int> counts;
  QuadratureScheme scheme = QuadratureScheme::kGaussLegendre;
  std::vector<double> margin;  // empty => zero margin on every axis
};

struct QuadratureNode {
  Coords x;
  double weight;
};

using QuadratureGrid = std::vector<QuadratureNode>;

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

QuadratureGrid quadrature_grid(const Chart& chart, const GridSpec& spec);

/// The margin-shrunk box actually covered by the grid.
std::vector<AxisRange> shrunk_box(const Chart& chart, const GridSpec& spec);

/// Fixed-order pairwise summation, reproducible bit for bit.
double pairwise_sum(std::span<const double> values);

/// Worker count for quadrature, from MBTOOL_THREADS (absent => 1).
int quadrature_threads();

/// Evaluates f at every node (possibly on several threads) and returns
/// the values in node order.
template <typename Value>
std::vector<Value> evaluate_nodes(const QuadratureGrid& grid,
                                  const std::function<Value(const Coords&)>& f);

/// sum_k w_k f(x_k), deterministic regardless of thread count.
double integrate(const QuadratureGrid& grid, const std::function<double(const Coords&)>& f);

// ---------------------------------------------------------------------------
// Built-in charts

Chart flat_chart(int dim = 2, double half_width = 10.0);
Chart sphere_chart(double radius = 1.0);
Chart torus_chart(double major = 2.0, double minor = 1.0);

/// Default grid for a built-in chart: Gauss-Legendre with a 1e-6 margin on
/// non-periodic axes.
GridSpec default_grid(const Chart& chart, std::vector<int> counts);

}  // namespace mbgeom

#include "mbgeom/detail/evaluate_nodes.hpp"
