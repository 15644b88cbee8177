#pragma once

#include "mbgeom/metric_bundle.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace mbgeom {

// Index conventions, fixed once for the whole library:
//   Gamma(k, i, j) = Γ^k_ij with  ∇_{∂_i} ∂_j = Γ^k_ij ∂_k
//     (i = differentiation direction, j = field being differentiated).
//   Riemann(l, k, i, j) = R^l_kij
//     = ∂_i Γ^l_jk - ∂_j Γ^l_ik + Γ^l_im Γ^m_jk - Γ^l_jm Γ^m_ik.

inline constexpr double kRiemannFdStep = 1e-4;

/// Christoffel symbols at one point; slice(k) holds the matrix Γ^k_{..}.
class Christoffel {
 public:
  explicit Christoffel(int n = 0) : slices_(n, Matrix::Zero(n, n)) {}

  int dim() const { return static_cast<int>(slices_.size()); }
  double operator()(int k, int i, int j) const { return slices_[k](i, j); }
  double& operator()(int k, int i, int j) { return slices_[k](i, j); }
  const Matrix& slice(int k) const { return slices_[k]; }
  Matrix& slice(int k) { return slices_[k]; }

  /// Γ^k(v, v) for every k, the quadratic term of the geodesic equation.
  Eigen::VectorXd contract(const Eigen::VectorXd& v) const;

  double max_abs_difference(const Christoffel& other) const;
  double torsion_defect() const;

 private:
  std::vector<Matrix> slices_;
};

enum class ChristoffelRoute { kStandard, kKoszul };

/// A connection-coefficient provider bound to a metric section.
struct ChristoffelField {
  MetricSection section;
  double h = kDefaultFdStep;
  std::function<Christoffel(const Coords&)> evaluate;
};

/// ∂_l g for l = 0..n-1 by central differences.
std::vector<Matrix> metric_derivatives(const MetricSection& section, const Coords& x,
                                       double h = kDefaultFdStep);

Christoffel christoffel_standard(const MetricSection& section, const Coords& x,
                                 double h = kDefaultFdStep);
Christoffel christoffel_koszul(const MetricSection& section, const Coords& x,
                               double h = kDefaultFdStep);

ChristoffelField levi_civita(const MetricSection& section,
                             ChristoffelRoute route = ChristoffelRoute::kStandard,
                             double h = kDefaultFdStep);

/// max_{i,j,k} |∂_i g_jk - Γ^l_ij g_lk - Γ^l_ik g_jl|.
double metric_compatibility_defect(const MetricSection& section, const ChristoffelField& gamma,
                                   const Coords& x);

class RiemannTensor {
 public:
  RiemannTensor(int n, Coords point) : n_(n), point_(std::move(point)), data_(n * n * n * n, 0.0) {}

  int dim() const { return n_; }
  const Coords& point() const { return point_; }
  double operator()(int l, int k, int i, int j) const { return data_[index(l, k, i, j)]; }
  double& operator()(int l, int k, int i, int j) { return data_[index(l, k, i, j)]; }

  /// max |R^l_kij + R^l_kji|
  double antisymmetry_defect() const;

 private:
  std::size_t index(int l, int k, int i, int j) const {
    return ((static_cast<std::size_t>(l) * n_ + k) * n_ + i) * n_ + j;
  }

  int n_;
  Coords point_;
  std::vector<double> data_;
};

RiemannTensor riemann_tensor(const ChristoffelField& gamma, const Coords& x,
                             double h = kRiemannFdStep);

/// K = R_1212 / det g on a surface. The outer step shrinks near a
/// non-periodic face so the nested stencil stays inside the chart.
double gaussian_curvature(const MetricSection& section, const Coords& x);

// ---------------------------------------------------------------------------
// Vector-bundle connections in a local frame (unitary gauge).

using ConnectionCoefficients = std::function<std::vector<ComplexMatrix>(const Coords&)>;

struct BundleConnection {
  int rank = 0;
  Chart base_chart;
  ConnectionCoefficients coefficients;  // A_mu(x), one r x r block per coordinate
  std::string label;
};

/// F_{mu nu}(x) for every ordered pair; F(mu, nu) = -F(nu, mu).
class Curvature2Form {
 public:
  Curvature2Form(int rank, int dim, Coords point)
      : rank_(rank), dim_(dim), point_(std::move(point)),
        blocks_(dim * dim, ComplexMatrix::Zero(rank, rank)) {}

  int rank() const { return rank_; }
  int dim() const { return dim_; }
  const Coords& point() const { return point_; }
  const ComplexMatrix& operator()(int mu, int nu) const { return blocks_[mu * dim_ + nu]; }
  ComplexMatrix& operator()(int mu, int nu) { return blocks_[mu * dim_ + nu]; }

  /// max |F + F^dagger| over all components.
  double hermitian_defect() const;

 private:
  int rank_;
  int dim_;
  Coords point_;
  std::vector<ComplexMatrix> blocks_;
};

/// max |A + A^dagger| across directions at x.
double skew_hermitian_defect(const BundleConnection& conn, const Coords& x);

Curvature2Form bundle_curvature(const BundleConnection& conn, const Coords& x,
                                double h = kDefaultFdStep);

BundleConnection trivial_connection(const Chart& base, int rank);
/// Line bundle O(n) on the round sphere: A_theta = 0, A_phi = (-i n / 2)(1 - cos theta).
BundleConnection monopole_connection(int charge, const Chart& sphere = sphere_chart());
/// A -> A + i dchi (rank 1 gauge change, chi given with its gradient).
BundleConnection gauge_transform(const BundleConnection& conn,
                                 std::function<Eigen::VectorXd(const Coords&)> grad_chi,
                                 std::string chi_label);

}  // namespace mbgeom
