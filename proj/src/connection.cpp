#include "mbgeom/connection.hpp"

#include <cmath>
#include <complex>

namespace mbgeom {

using namespace std::complex_literals;

Eigen::VectorXd Christoffel::contract(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(dim());
  for (int k = 0; k < dim(); ++k) out[k] = v.dot(slices_[k] * v);
  return out;
}

double Christoffel::max_abs_difference(const Christoffel& other) const {
  double d = 0.0;
  for (int k = 0; k < dim(); ++k)
    d = std::max(d, (slices_[k] - other.slices_[k]).cwiseAbs().maxCoeff());
  return d;
}

double Christoffel::torsion_defect() const {
  double d = 0.0;
  for (const auto& s : slices_) d = std::max(d, symmetry_defect(s));
  return d;
}

std::vector<Matrix> metric_derivatives(const MetricSection& section, const Coords& x, double h) {
  const int n = section.dim();
  std::vector<Matrix> dg(n);
  Coords p = x;
  for (int l = 0; l < n; ++l) {
    p[l] = x[l] + h;
    const Matrix forward = section.sampler(p);
    p[l] = x[l] - h;
    const Matrix backward = section.sampler(p);
    p[l] = x[l];
    dg[l] = (forward - backward) / (2.0 * h);
  }
  return dg;
}

Christoffel christoffel_standard(const MetricSection& section, const Coords& x, double h) {
  const int n = section.dim();
  const Matrix g = section.sampler(x);
  const double det = g.determinant();
  if (!(std::abs(det) > kSpdTolerance * std::pow(g.cwiseAbs().maxCoeff(), n)))
    throw GeometryError(ErrorKind::kSingularMetric, section.label);
  const Matrix ginv = g.inverse();
  const std::vector<Matrix> dg = metric_derivatives(section, x, h);

  Christoffel gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gamma(k, i, j) = 0.5 * s;
      }
  return gamma;
}

Christoffel christoffel_koszul(const MetricSection& section, const Coords& x, double h) {
  const int n = section.dim();
  const Matrix g = section.sampler(x);
  const Eigen::LDLT<Matrix> solver(g);
  if (solver.info() != Eigen::Success || !solver.isPositive() ||
      std::abs(solver.vectorD().minCoeff()) <= kSpdTolerance * g.cwiseAbs().maxCoeff())
    throw GeometryError(ErrorKind::kSingularMetric, section.label);

  // Metric samples along each coordinate axis; X(g(Y, Z)) for coordinate
  // fields X = ∂_a, Y = ∂_b, Z = ∂_c is a scalar central difference.
  std::vector<Matrix> plus(n), minus(n);
  Coords p = x;
  for (int a = 0; a < n; ++a) {
    p[a] = x[a] + h;
    plus[a] = section.sampler(p);
    p[a] = x[a] - h;
    minus[a] = section.sampler(p);
    p[a] = x[a];
  }
  const auto derivative = [&](int a, int b, int c) {
    return (plus[a](b, c) - minus[a](b, c)) / (2.0 * h);
  };

  // Coordinate fields commute, so every bracket term of the Koszul formula drops:
  //   2 g(∇_X Y, Z) = X g(Y,Z) + Y g(Z,X) - Z g(X,Y).
  Christoffel gamma(n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l)
        rhs[l] = 0.5 * (derivative(i, j, l) + derivative(j, l, i) - derivative(l, i, j));
      const Eigen::VectorXd column = solver.solve(rhs);
      for (int k = 0; k < n; ++k) gamma(k, i, j) = column[k];
    }
  return gamma;
}

ChristoffelField levi_civita(const MetricSection& section, ChristoffelRoute route, double h) {
  ChristoffelField field{section, h, {}};
  if (route == ChristoffelRoute::kStandard)
    field.evaluate = [section, h](const Coords& x) { return christoffel_standard(section, x, h); };
  else
    field.evaluate = [section, h](const Coords& x) { return christoffel_koszul(section, x, h); };
  return field;
}

double metric_compatibility_defect(const MetricSection& section, const ChristoffelField& gamma,
                                   const Coords& x) {
  const int n = section.dim();
  const Matrix g = section.sampler(x);
  const std::vector<Matrix> dg = metric_derivatives(section, x, gamma.h);
  const Christoffel c = gamma.evaluate(x);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double r = dg[i](j, k);
        for (int l = 0; l < n; ++l) r -= c(l, i, j) * g(l, k) + c(l, i, k) * g(j, l);
        worst = std::max(worst, std::abs(r));
      }
  return worst;
}

double RiemannTensor::antisymmetry_defect() const {
  double d = 0.0;
  for (int l = 0; l < n_; ++l)
    for (int k = 0; k < n_; ++k)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          d = std::max(d, std::abs((*this)(l, k, i, j) + (*this)(l, k, j, i)));
  return d;
}

RiemannTensor riemann_tensor(const ChristoffelField& gamma, const Coords& x, double h) {
  const Chart& chart = gamma.section.chart;
  const int n = chart.dim();
  if (!chart.interior(x, h + gamma.h))
    throw GeometryError(ErrorKind::kBoundaryClearance,
                        "riemann_tensor stencil leaves " + chart.label);

  const Christoffel centre = gamma.evaluate(x);
  std::vector<Christoffel> d_gamma;  // ∂_i Γ
  d_gamma.reserve(n);
  Coords p = x;
  for (int i = 0; i < n; ++i) {
    p[i] = x[i] + h;
    const Christoffel forward = gamma.evaluate(p);
    p[i] = x[i] - h;
    const Christoffel backward = gamma.evaluate(p);
    p[i] = x[i];
    Christoffel d(n);
    for (int k = 0; k < n; ++k) d.slice(k) = (forward.slice(k) - backward.slice(k)) / (2.0 * h);
    d_gamma.push_back(std::move(d));
  }

  RiemannTensor r(n, x);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = d_gamma[i](l, j, k) - d_gamma[j](l, i, k);
          for (int m = 0; m < n; ++m)
            v += centre(l, i, m) * centre(m, j, k) - centre(l, j, m) * centre(m, i, k);
          r(l, k, i, j) = v;
        }
  return r;
}

double gaussian_curvature(const MetricSection& section, const Coords& x) {
  if (section.dim() != 2)
    throw GeometryError(ErrorKind::kDimensionMismatch, "gaussian_curvature needs a surface");
  const double clearance = section.chart.boundary_distance(x);
  const double outer = std::min(kRiemannFdStep, clearance / 4.0);
  const double inner = std::min(kDefaultFdStep, outer / 10.0);
  if (!(outer > 1e-12))
    throw GeometryError(ErrorKind::kBoundaryClearance, "gaussian_curvature on the chart boundary");
  const ChristoffelField gamma = levi_civita(section, ChristoffelRoute::kStandard, inner);
  const RiemannTensor r = riemann_tensor(gamma, x, outer);
  const Matrix g = section.sampler(x);
  double lowered = 0.0;  // R_1212 = g_{0l} R^l_{101}
  for (int l = 0; l < 2; ++l) lowered += g(0, l) * r(l, 1, 0, 1);
  return lowered / g.determinant();
}

// ---------------------------------------------------------------------------

double Curvature2Form::hermitian_defect() const {
  double d = 0.0;
  for (const auto& f : blocks_)
    if (f.size() > 0) d = std::max(d, (f + f.adjoint()).cwiseAbs().maxCoeff());
  return d;
}

double skew_hermitian_defect(const BundleConnection& conn, const Coords& x) {
  double d = 0.0;
  for (const auto& a : conn.coefficients(x))
    if (a.size() > 0) d = std::max(d, (a + a.adjoint()).cwiseAbs().maxCoeff());
  return d;
}

Curvature2Form bundle_curvature(const BundleConnection& conn, const Coords& x, double h) {
  const Chart& chart = conn.base_chart;
  const int n = chart.dim();
  if (!chart.interior(x, h))
    throw GeometryError(ErrorKind::kBoundaryClearance,
                        "bundle_curvature stencil leaves " + chart.label);
  const std::vector<ComplexMatrix> a = conn.coefficients(x);
  std::vector<std::vector<ComplexMatrix>> da(n);  // da[mu][nu] = ∂_mu A_nu
  Coords p = x;
  for (int mu = 0; mu < n; ++mu) {
    p[mu] = x[mu] + h;
    const auto forward = conn.coefficients(p);
    p[mu] = x[mu] - h;
    const auto backward = conn.coefficients(p);
    p[mu] = x[mu];
    for (int nu = 0; nu < n; ++nu) da[mu].push_back((forward[nu] - backward[nu]) / (2.0 * h));
  }
  Curvature2Form f(conn.rank, n, x);
  for (int mu = 0; mu < n; ++mu)
    for (int nu = mu + 1; nu < n; ++nu) {
      ComplexMatrix fmn = da[mu][nu] - da[nu][mu] + a[mu] * a[nu] - a[nu] * a[mu];
      f(nu, mu) = -fmn;
      f(mu, nu) = std::move(fmn);
    }
  return f;
}

BundleConnection trivial_connection(const Chart& base, int rank) {
  const int n = base.dim();
  return {rank, base,
          [n, rank](const Coords&) {
            return std::vector<ComplexMatrix>(n, ComplexMatrix::Zero(rank, rank));
          },
          "trivial:rank=" + std::to_string(rank)};
}

BundleConnection monopole_connection(int charge, const Chart& sphere) {
  return {1, sphere,
          [charge](const Coords& x) {
            std::vector<ComplexMatrix> a(2, ComplexMatrix::Zero(1, 1));
            a[1](0, 0) = (-0.5i * static_cast<double>(charge)) * (1.0 - std::cos(x[0]));
            return a;
          },
          "monopole:n=" + std::to_string(charge)};
}

BundleConnection gauge_transform(const BundleConnection& conn,
                                 std::function<Eigen::VectorXd(const Coords&)> grad_chi,
                                 std::string chi_label) {
  return {conn.rank, conn.base_chart,
          [inner = conn.coefficients, grad = std::move(grad_chi), r = conn.rank](const Coords& x) {
            auto a = inner(x);
            const Eigen::VectorXd d = grad(x);
            for (std::size_t mu = 0; mu < a.size(); ++mu)
              a[mu] += (1.0i * d[static_cast<Eigen::Index>(mu)]) * ComplexMatrix::Identity(r, r);
            return a;
          },
          conn.label + "+gauge:" + chi_label};
}

}  // namespace mbgeom
