#pragma once

#include "mbgeom/charts.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mbgeom {

inline constexpr double kSpdTolerance = 1e-10;

/// A point of the fiber G_x(M): a symmetric positive-definite form on T_xM
/// together with its base point, so projection is the identity on `point`.
struct MetricFiber {
  Coords point;
  Matrix form;
};

struct TangentVector {
  Coords base;
  Eigen::VectorXd components;
};

using MetricSampler = std::function<Matrix(const Coords&)>;

/// A section x -> g_x over one chart. The sampler must be deterministic and
/// reentrant. The total space of the bundle is never materialized.
struct MetricSection {
  Chart chart;
  MetricSampler sampler;
  std::string label;

  int dim() const { return chart.dim(); }
};

/// Finite ordered family {g_i} sharing one chart; labels play the role of I.
struct MultiMetricFamily {
  std::vector<MetricSection> members;
  std::vector<std::string> index_labels;

  std::size_t size() const { return members.size(); }
};

struct SubbundlePredicate {
  std::function<bool(const MetricFiber&)> test;
  std::string label;
};

struct SpdReport {
  bool pass = false;
  double symmetry_defect = 0.0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

struct AxiomReport {
  double positivity = 0.0;
  double homogeneity = 0.0;
  double triangle = 0.0;
  double norm_scale = 0.0;  // largest |alpha|*|v| or |v|+|w| seen

  double worst() const { return std::max({positivity, homogeneity, triangle}); }
};

struct EquivalenceConstants {
  double lower;  // c in c|v|_j <= |v|_i
  double upper;  // C in |v|_i <= C|v|_j
};

// ---------------------------------------------------------------------------
// Expression-level helpers over any Eigen dense types.

/// g(v, w) for an arbitrary bilinear form g.
template <typename DerivedG, typename DerivedV, typename DerivedW>
typename DerivedG::Scalar bilinear(const Eigen::MatrixBase<DerivedG>& g,
                                   const Eigen::MatrixBase<DerivedV>& v,
                                   const Eigen::MatrixBase<DerivedW>& w) {
  return v.dot(g * w);
}

/// sqrt(v^T g v), clamped at zero against roundoff.
template <typename DerivedG, typename DerivedV>
typename DerivedG::Scalar form_norm(const Eigen::MatrixBase<DerivedG>& g,
                                    const Eigen::MatrixBase<DerivedV>& v) {
  using std::sqrt;
  const auto q = bilinear(g, v, v);
  return q > typename DerivedG::Scalar(0) ? sqrt(q) : typename DerivedG::Scalar(0);
}

/// Maximum absolute asymmetry of a square matrix.
template <typename Derived>
typename Derived::RealScalar symmetry_defect(const Eigen::MatrixBase<Derived>& g) {
  return (g - g.transpose()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

SpdReport validate_spd(const Matrix& g, double tol = kSpdTolerance);

double metric_norm(const MetricFiber& fiber, const TangentVector& v);

MetricFiber section_evaluate(const MetricSection& section, const Coords& x);

Eigen::VectorXd multi_norm(const MultiMetricFamily& family, const Coords& x,
                           const Eigen::VectorXd& v);

AxiomReport norm_axiom_check(const MetricFiber& fiber, int sample_count, std::uint64_t seed);

bool subbundle_contains(const SubbundlePredicate& pred, const MetricFiber& fiber);

/// Generalized eigenvalue bounds of g_i against g_j via Cholesky reduction.
EquivalenceConstants norm_equivalence_constants(const Matrix& gi, const Matrix& gj);
EquivalenceConstants norm_equivalence_constants(const MultiMetricFamily& family, const Coords& x,
                                                std::size_t i, std::size_t j);

/// Positive c with g = c * g0 to 1e-9 relative, if any.
std::optional<double> conformal_factor(const Matrix& g, const Matrix& g0, double tol = 1e-9);

SubbundlePredicate diagonal_predicate(double tol = 1e-12);
SubbundlePredicate conformal_predicate(MetricSection reference, double tol = 1e-9);

/// Largest ratio |g(x + h e_i) - g(x)|_max / h over the given points and axes.
/// Discontinuous samplers show up as ratios of order 1/h.
double lipschitz_estimate(const MetricSection& section, const std::vector<Coords>& points,
                          double h = 1e-6);

void validate_family(const MultiMetricFamily& family);

// ---------------------------------------------------------------------------
// Built-in sections

MetricSection induced_section(const Chart& chart);
MetricSection constant_section(const Chart& chart, const Matrix& g, std::string label);
/// c * g, keeping the chart of `base`.
MetricSection scaled_section(const MetricSection& base, double factor);
/// exp(2 lambda(x)) * g.
MetricSection conformal_section(const MetricSection& base, std::function<double(const Coords&)> lambda,
                                std::string lambda_label);

/// Closed-form sphere and torus metrics (the same forms the embeddings induce).
MetricSection round_sphere_section(double radius = 1.0);
MetricSection torus_section(double major = 2.0, double minor = 1.0);
MetricSection flat_section(int dim = 2);

}  // namespace mbgeom
