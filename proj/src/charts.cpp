#include "mbgeom/charts.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace mbgeom {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingEmbedding: return "missing-embedding";
    case ErrorKind::kPointOutsideDomain: return "point-outside-domain";
    case ErrorKind::kRankDeficient: return "rank-deficient-jacobian";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kBasePointMismatch: return "base-point-mismatch";
    case ErrorKind::kInvalidSection: return "invalid-section";
    case ErrorKind::kSingularMetric: return "singular-metric";
    case ErrorKind::kIndexOutOfRange: return "index-out-of-range";
    case ErrorKind::kBoundaryClearance: return "boundary-clearance";
    case ErrorKind::kTrajectoryExitsDomain: return "trajectory-exits-domain";
    case ErrorKind::kChartMismatch: return "chart-mismatch";
    case ErrorKind::kCoarseGrid: return "coarse-grid";
    case ErrorKind::kDegenerateGrid: return "degenerate-grid";
    case ErrorKind::kUnknownDescriptor: return "unknown-descriptor";
  }
  return "unknown";
}

namespace {

std::string describe(const Coords& x) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

double wrap_into(double value, const AxisRange& axis) {
  const double period = axis.length();
  double r = std::fmod(value - axis.lower, period);
  if (r < 0) r += period;
  return axis.lower + r;
}

}  // namespace

bool Chart::interior(const Coords& x, double clearance) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(x[i])) return false;
    if (domain[i].periodic) continue;
    if (x[i] - domain[i].lower < clearance || domain[i].upper - x[i] < clearance) return false;
    if (x[i] <= domain[i].lower || x[i] >= domain[i].upper) return false;
  }
  return true;
}

double Chart::boundary_distance(const Coords& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) {
    if (domain[i].periodic) continue;
    d = std::min({d, x[i] - domain[i].lower, domain[i].upper - x[i]});
  }
  return d;
}

Coords Chart::wrap(const Coords& x) const {
  Coords y = x;
  for (int i = 0; i < dim(); ++i)
    if (domain[i].periodic) y[i] = wrap_into(x[i], domain[i]);
  return y;
}

Coords Chart::displacement(const Coords& a, const Coords& b) const {
  Coords d = b - a;
  for (int i = 0; i < dim(); ++i) {
    if (!domain[i].periodic) continue;
    const double period = domain[i].length();
    d[i] -= period * std::round(d[i] / period);
  }
  return d;
}

void validate_chart(const Chart& chart) {
  if (chart.domain.empty())
    throw GeometryError(ErrorKind::kDimensionMismatch, "chart '" + chart.label + "' has no axes");
  for (const auto& axis : chart.domain)
    if (!(axis.lower < axis.upper))
      throw GeometryError(ErrorKind::kDegenerateGrid,
                          "chart '" + chart.label + "' has a degenerate axis");
}

Matrix embedding_jacobian_fd(const Chart& chart, const Coords& x, double h) {
  if (!chart.has_embedding())
    throw GeometryError(ErrorKind::kMissingEmbedding, chart.label);
  if (!chart.interior(x, h))
    throw GeometryError(ErrorKind::kPointOutsideDomain, chart.label + " at " + describe(x));
  const int n = chart.dim();
  const Eigen::VectorXd centre = chart.embedding(x);
  Matrix jac(centre.size(), n);
  Coords probe = x;
  for (int i = 0; i < n; ++i) {
    probe[i] = x[i] + h;
    const Eigen::VectorXd forward = chart.embedding(probe);
    probe[i] = x[i] - h;
    const Eigen::VectorXd backward = chart.embedding(probe);
    probe[i] = x[i];
    jac.col(i) = (forward - backward) / (2.0 * h);
  }
  return jac;
}

Matrix embedding_jacobian(const Chart& chart, const Coords& x, double h) {
  if (!chart.has_embedding())
    throw GeometryError(ErrorKind::kMissingEmbedding, chart.label);
  if (chart.jacobian) {
    if (!chart.interior(x))
      throw GeometryError(ErrorKind::kPointOutsideDomain, chart.label + " at " + describe(x));
    return chart.jacobian(x);
  }
  return embedding_jacobian_fd(chart, x, h);
}

Matrix induced_metric(const Chart& chart, const Coords& x) {
  const Matrix jac = embedding_jacobian(chart, x);
  const Eigen::JacobiSVD<Matrix> svd(jac);
  const auto& sv = svd.singularValues();
  if (sv.size() < chart.dim() || sv[sv.size() - 1] <= kRankFloor)
    throw GeometryError(ErrorKind::kRankDeficient, chart.label + " at " + describe(x));
  return jac.transpose() * jac;
}

// ---------------------------------------------------------------------------

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute derivative at the converged root for the weight.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

std::vector<AxisRange> shrunk_box(const Chart& chart, const GridSpec& spec) {
  const int n = chart.dim();
  if (static_cast<int>(spec.counts.size()) != n)
    throw GeometryError(ErrorKind::kDimensionMismatch, "grid counts do not match chart dimension");
  if (!spec.margin.empty() && static_cast<int>(spec.margin.size()) != n)
    throw GeometryError(ErrorKind::kDimensionMismatch, "grid margin does not match chart dimension");
  std::vector<AxisRange> box = chart.domain;
  for (int i = 0; i < n; ++i) {
    if (spec.counts[i] < 2)
      throw GeometryError(ErrorKind::kDegenerateGrid, "node count below 2 on an axis");
    const double m = spec.margin.empty() ? 0.0 : spec.margin[i];
    if (m < 0) throw GeometryError(ErrorKind::kDegenerateGrid, "negative margin");
    box[i].lower += m;
    box[i].upper -= m;
    if (!(box[i].lower < box[i].upper))
      throw GeometryError(ErrorKind::kDegenerateGrid, "margin collapses the box");
  }
  return box;
}

QuadratureGrid quadrature_grid(const Chart& chart, const GridSpec& spec) {
  const std::vector<AxisRange> box = shrunk_box(chart, spec);
  const int n = chart.dim();

  std::vector<std::vector<double>> axis_nodes(n), axis_weights(n);
  for (int i = 0; i < n; ++i) {
    const int m = spec.counts[i];
    const double a = box[i].lower, b = box[i].upper;
    if (spec.scheme == QuadratureScheme::kMidpoint) {
      const double w = (b - a) / m;
      for (int k = 0; k < m; ++k) {
        axis_nodes[i].push_back(a + (k + 0.5) * w);
        axis_weights[i].push_back(w);
      }
    } else {
      std::vector<double> t, w;
      gauss_legendre(m, t, w);
      for (int k = 0; k < m; ++k) {
        axis_nodes[i].push_back(0.5 * (a + b) + 0.5 * (b - a) * t[k]);
        axis_weights[i].push_back(0.5 * (b - a) * w[k]);
      }
    }
  }

  std::size_t total = 1;
  for (int c : spec.counts) total *= static_cast<std::size_t>(c);
  QuadratureGrid grid;
  grid.reserve(total);
  std::vector<int> idx(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Coords x(n);
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      x[i] = axis_nodes[i][idx[i]];
      w *= axis_weights[i][idx[i]];
    }
    grid.push_back({std::move(x), w});
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < spec.counts[i]) break;
      idx[i] = 0;
    }
  }
  return grid;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t mid = values.size() / 2;
  return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

int quadrature_threads() {
  const char* env = std::getenv("MBTOOL_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 256));
}

double integrate(const QuadratureGrid& grid, const std::function<double(const Coords&)>& f) {
  std::vector<double> values = evaluate_nodes<double>(grid, f);
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] *= grid[k].weight;
  return pairwise_sum(values);
}

// ---------------------------------------------------------------------------

Chart flat_chart(int dim, double half_width) {
  Chart c;
  c.label = "flat";
  c.domain.assign(dim, AxisRange{-half_width, half_width, false});
  c.embedding = [](const Coords& x) -> Eigen::VectorXd { return x; };
  c.jacobian = [dim](const Coords&) -> Matrix { return Matrix::Identity(dim, dim); };
  return c;
}

Chart sphere_chart(double radius) {
  Chart c;
  std::ostringstream label;
  label << "sphere:r=" << radius;
  c.label = label.str();
  c.domain = {AxisRange{0.0, kPi, false}, AxisRange{0.0, 2.0 * kPi, true}};
  c.embedding = [radius](const Coords& x) -> Eigen::VectorXd {
    const double st = std::sin(x[0]), ct = std::cos(x[0]);
    const double sp = std::sin(x[1]), cp = std::cos(x[1]);
    return Eigen::Vector3d(radius * st * cp, radius * st * sp, radius * ct);
  };
  c.jacobian = [radius](const Coords& x) -> Matrix {
    const double st = std::sin(x[0]), ct = std::cos(x[0]);
    const double sp = std::sin(x[1]), cp = std::cos(x[1]);
    Matrix j(3, 2);
    j << radius * ct * cp, -radius * st * sp,
         radius * ct * sp, radius * st * cp,
         -radius * st, 0.0;
    return j;
  };
  return c;
}

Chart torus_chart(double major, double minor) {
  Chart c;
  std::ostringstream label;
  label << "torus:R=" << major << ",r=" << minor;
  c.label = label.str();
  c.domain = {AxisRange{0.0, 2.0 * kPi, true}, AxisRange{0.0, 2.0 * kPi, true}};
  c.embedding = [major, minor](const Coords& x) -> Eigen::VectorXd {
    const double ring = major + minor * std::cos(x[0]);
    return Eigen::Vector3d(ring * std::cos(x[1]), ring * std::sin(x[1]), minor * std::sin(x[0]));
  };
  c.jacobian = [major, minor](const Coords& x) -> Matrix {
    const double su = std::sin(x[0]), cu = std::cos(x[0]);
    const double sv = std::sin(x[1]), cv = std::cos(x[1]);
    const double ring = major + minor * cu;
    Matrix j(3, 2);
    j << -minor * su * cv, -ring * sv,
         -minor * su * sv, ring * cv,
         minor * cu, 0.0;
    return j;
  };
  return c;
}

GridSpec default_grid(const Chart& chart, std::vector<int> counts) {
  GridSpec spec;
  spec.counts = std::move(counts);
  spec.scheme = QuadratureScheme::kGaussLegendre;
  for (const auto& axis : chart.domain) spec.margin.push_back(axis.periodic ? 0.0 : 1e-6);
  return spec;
}

}  // namespace mbgeom
