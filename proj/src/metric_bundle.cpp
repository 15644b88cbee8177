#include "mbgeom/metric_bundle.hpp"

#include <random>
#include <sstream>

namespace mbgeom {

SpdReport validate_spd(const Matrix& g, double tol) {
  if (g.rows() != g.cols())
    throw GeometryError(ErrorKind::kDimensionMismatch, "validate_spd needs a square matrix");
  SpdReport report;
  if (g.size() == 0) return report;
  report.symmetry_defect = symmetry_defect(g);
  const Matrix sym = 0.5 * (g + g.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = eig.eigenvalues().minCoeff();
  report.max_eigenvalue = eig.eigenvalues().maxCoeff();
  const double scale = g.cwiseAbs().maxCoeff();
  report.pass = std::isfinite(scale) && report.symmetry_defect <= tol * scale &&
                report.max_eigenvalue > 0.0 &&
                report.min_eigenvalue > tol * report.max_eigenvalue;
  return report;
}

double metric_norm(const MetricFiber& fiber, const TangentVector& v) {
  if (v.components.size() != fiber.form.rows() || v.base.size() != fiber.point.size())
    throw GeometryError(ErrorKind::kDimensionMismatch, "tangent vector and fiber disagree");
  if (v.base != fiber.point)
    throw GeometryError(ErrorKind::kBasePointMismatch, "vector is not based at the fiber point");
  return form_norm(fiber.form, v.components);
}

MetricFiber section_evaluate(const MetricSection& section, const Coords& x) {
  if (x.size() != section.dim())
    throw GeometryError(ErrorKind::kDimensionMismatch, section.label);
  if (!section.chart.interior(x))
    throw GeometryError(ErrorKind::kPointOutsideDomain, section.label);
  MetricFiber fiber{x, section.sampler(x)};
  if (fiber.form.rows() != section.dim() || fiber.form.cols() != section.dim())
    throw GeometryError(ErrorKind::kInvalidSection, section.label + ": sampler returned wrong shape");
  if (!validate_spd(fiber.form).pass)
    throw GeometryError(ErrorKind::kInvalidSection, section.label + ": form is not SPD");
  return fiber;
}

void validate_family(const MultiMetricFamily& family) {
  if (family.members.empty())
    throw GeometryError(ErrorKind::kIndexOutOfRange, "multi-metric family is empty");
  if (!family.index_labels.empty() && family.index_labels.size() != family.members.size())
    throw GeometryError(ErrorKind::kDimensionMismatch, "index labels do not match members");
  for (const auto& m : family.members)
    if (m.chart.label != family.members.front().chart.label)
      throw GeometryError(ErrorKind::kChartMismatch, "family members live on different charts");
}

Eigen::VectorXd multi_norm(const MultiMetricFamily& family, const Coords& x,
                           const Eigen::VectorXd& v) {
  validate_family(family);
  Eigen::VectorXd out(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const MetricFiber fiber = section_evaluate(family.members[i], x);
    out[static_cast<Eigen::Index>(i)] = metric_norm(fiber, {x, v});
  }
  return out;
}

AxiomReport norm_axiom_check(const MetricFiber& fiber, int sample_count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> scalar(-5.0, 5.0);
  const Eigen::Index n = fiber.form.rows();
  const auto draw = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
  };
  const auto norm = [&](const Eigen::VectorXd& v) { return form_norm(fiber.form, v); };

  AxiomReport r;
  for (int s = 0; s < sample_count; ++s) {
    const Eigen::VectorXd v = draw();
    const Eigen::VectorXd w = draw();
    const double alpha = (s == 0) ? 0.0 : scalar(rng);
    const double nv = norm(v), nw = norm(w);
    r.positivity = std::max(r.positivity, std::max(-nv, 0.0));
    r.homogeneity = std::max(r.homogeneity, std::abs(norm(alpha * v) - std::abs(alpha) * nv));
    r.triangle = std::max(r.triangle, std::max(norm(v + w) - nv - nw, 0.0));
    r.norm_scale = std::max({r.norm_scale, std::abs(alpha) * nv, nv + nw});
  }
  // The zero vector must have norm exactly zero.
  r.positivity = std::max(r.positivity, norm(Eigen::VectorXd::Zero(n)));
  return r;
}

bool subbundle_contains(const SubbundlePredicate& pred, const MetricFiber& fiber) {
  return validate_spd(fiber.form).pass && pred.test(fiber);
}

EquivalenceConstants norm_equivalence_constants(const Matrix& gi, const Matrix& gj) {
  if (gi.rows() != gj.rows() || gi.cols() != gj.cols())
    throw GeometryError(ErrorKind::kDimensionMismatch, "metrics of different size");
  const Eigen::LLT<Matrix> chol(gj);
  if (chol.info() != Eigen::Success)
    throw GeometryError(ErrorKind::kSingularMetric, "reference metric is not SPD");
  const Matrix l = chol.matrixL();
  // L^{-1} g_i L^{-T}
  const Matrix left = l.triangularView<Eigen::Lower>().solve(gi);
  const Matrix reduced =
      l.triangularView<Eigen::Lower>().solve(left.transpose()).transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (reduced + reduced.transpose()),
                                                  Eigen::EigenvaluesOnly);
  return {std::sqrt(std::max(eig.eigenvalues().minCoeff(), 0.0)),
          std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 0.0))};
}

EquivalenceConstants norm_equivalence_constants(const MultiMetricFamily& family, const Coords& x,
                                                std::size_t i, std::size_t j) {
  validate_family(family);
  if (i >= family.size() || j >= family.size())
    throw GeometryError(ErrorKind::kIndexOutOfRange, "family index out of range");
  return norm_equivalence_constants(section_evaluate(family.members[i], x).form,
                                    section_evaluate(family.members[j], x).form);
}

std::optional<double> conformal_factor(const Matrix& g, const Matrix& g0, double tol) {
  if (g.rows() != g0.rows() || g.cols() != g0.cols()) return std::nullopt;
  const double trace0 = g0.trace();
  if (!(std::abs(trace0) > 0.0)) return std::nullopt;
  const double c = g.trace() / trace0;
  if (!(c > 0.0)) return std::nullopt;
  const double defect = (g - c * g0).cwiseAbs().maxCoeff();
  if (defect > tol * c * g0.cwiseAbs().maxCoeff()) return std::nullopt;
  return c;
}

SubbundlePredicate diagonal_predicate(double tol) {
  return {[tol](const MetricFiber& f) {
            const Matrix off = f.form - Matrix(f.form.diagonal().asDiagonal());
            return off.cwiseAbs().maxCoeff() <= tol * f.form.cwiseAbs().maxCoeff();
          },
          "diagonal"};
}

SubbundlePredicate conformal_predicate(MetricSection reference, double tol) {
  std::string label = "conformal-to-" + reference.label;
  return {[ref = std::move(reference), tol](const MetricFiber& f) {
            return conformal_factor(f.form, ref.sampler(f.point), tol).has_value();
          },
          std::move(label)};
}

double lipschitz_estimate(const MetricSection& section, const std::vector<Coords>& points,
                          double h) {
  double worst = 0.0;
  for (const auto& x : points) {
    const Matrix g0 = section.sampler(x);
    for (int i = 0; i < section.dim(); ++i) {
      Coords y = x;
      y[i] += h;
      worst = std::max(worst, (section.sampler(y) - g0).cwiseAbs().maxCoeff() / h);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

MetricSection induced_section(const Chart& chart) {
  if (!chart.has_embedding()) throw GeometryError(ErrorKind::kMissingEmbedding, chart.label);
  // Sampler skips the domain check so finite-difference stencils may cross
  // periodic seams and graze the boundary.
  const JacobianMap jac = chart.jacobian;
  const EmbeddingMap emb = chart.embedding;
  MetricSampler sampler;
  if (jac) {
    sampler = [jac](const Coords& x) -> Matrix {
      const Matrix j = jac(x);
      return j.transpose() * j;
    };
  } else {
    sampler = [emb](const Coords& x) -> Matrix {
      const double h = kDefaultFdStep;
      Matrix j(emb(x).size(), x.size());
      Coords p = x;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        p[i] = x[i] + h;
        const Eigen::VectorXd f = emb(p);
        p[i] = x[i] - h;
        j.col(i) = (f - emb(p)) / (2.0 * h);
        p[i] = x[i];
      }
      return j.transpose() * j;
    };
  }
  return {chart, std::move(sampler), "induced:" + chart.label};
}

MetricSection constant_section(const Chart& chart, const Matrix& g, std::string label) {
  return {chart, [g](const Coords&) -> Matrix { return g; }, std::move(label)};
}

MetricSection scaled_section(const MetricSection& base, double factor) {
  std::ostringstream label;
  label << "scaled:" << factor << ":" << base.label;
  return {base.chart,
          [s = base.sampler, factor](const Coords& x) -> Matrix { return factor * s(x); },
          label.str()};
}

MetricSection conformal_section(const MetricSection& base,
                                std::function<double(const Coords&)> lambda,
                                std::string lambda_label) {
  return {base.chart,
          [s = base.sampler, lambda = std::move(lambda)](const Coords& x) -> Matrix {
            return std::exp(2.0 * lambda(x)) * s(x);
          },
          "conformal:" + base.label + ":lambda=" + lambda_label};
}

MetricSection round_sphere_section(double radius) {
  const double r2 = radius * radius;
  Chart chart = sphere_chart(radius);
  std::string label = chart.label;
  return {std::move(chart),
          [r2](const Coords& x) -> Matrix {
            const double s = std::sin(x[0]);
            Matrix g = Matrix::Zero(2, 2);
            g(0, 0) = r2;
            g(1, 1) = r2 * s * s;
            return g;
          },
          std::move(label)};
}

MetricSection torus_section(double major, double minor) {
  Chart chart = torus_chart(major, minor);
  std::string label = chart.label;
  return {std::move(chart),
          [major, minor](const Coords& x) -> Matrix {
            const double ring = major + minor * std::cos(x[0]);
            Matrix g = Matrix::Zero(2, 2);
            g(0, 0) = minor * minor;
            g(1, 1) = ring * ring;
            return g;
          },
          std::move(label)};
}

MetricSection flat_section(int dim) {
  return constant_section(flat_chart(dim), Matrix::Identity(dim, dim), "flat");
}

}  // namespace mbgeom
