#include "mbgeom/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace mbgeom {

double GeodesicPath::max_speed_drift() const {
  if (speeds.empty() || speeds.front() == 0.0) return 0.0;
  double worst = 0.0;
  for (double s : speeds) worst = std::max(worst, std::abs(s - speeds.front()));
  return worst / speeds.front();
}

double GeodesicPath::length() const {
  double total = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k)
    total += 0.5 * (speeds[k] + speeds[k - 1]) * (times[k] - times[k - 1]);
  return total;
}

namespace {

struct Derivative {
  Eigen::VectorXd dx;
  Eigen::VectorXd dv;
};

Derivative geodesic_rhs(const ChristoffelField& gamma, const Coords& x, const Eigen::VectorXd& v) {
  return {v, -gamma.evaluate(x).contract(v)};
}

void check_inside(const Chart& chart, const Coords& x) {
  for (int i = 0; i < chart.dim(); ++i) {
    if (!std::isfinite(x[i]))
      throw GeometryError(ErrorKind::kTrajectoryExitsDomain, "non-finite state on " + chart.label);
    if (chart.domain[i].periodic) continue;
    if (x[i] <= chart.domain[i].lower || x[i] >= chart.domain[i].upper)
      throw GeometryError(ErrorKind::kTrajectoryExitsDomain, chart.label);
  }
}

void rk4_step(const ChristoffelField& gamma, Coords& x, Eigen::VectorXd& v, double dt) {
  const Derivative k1 = geodesic_rhs(gamma, x, v);
  const Derivative k2 = geodesic_rhs(gamma, x + 0.5 * dt * k1.dx, v + 0.5 * dt * k1.dv);
  const Derivative k3 = geodesic_rhs(gamma, x + 0.5 * dt * k2.dx, v + 0.5 * dt * k2.dv);
  const Derivative k4 = geodesic_rhs(gamma, x + dt * k3.dx, v + dt * k3.dv);
  x += (dt / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  v += (dt / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
}

int step_count(double duration, double dt) {
  return std::max(1, static_cast<int>(std::ceil(duration / dt - 1e-9)));
}

/// Endpoint only, no recording.
Coords shoot(const ChristoffelField& gamma, Coords x, Eigen::VectorXd v, double duration,
             double dt) {
  const Chart& chart = gamma.section.chart;
  if (duration <= 0.0) return x;
  const int steps = step_count(duration, dt);
  const double h = duration / steps;
  for (int s = 0; s < steps; ++s) {
    rk4_step(gamma, x, v, h);
    x = chart.wrap(x);
    check_inside(chart, x);
  }
  return x;
}

// Minimal Nelder-Mead on R^n with the standard coefficients.
struct SimplexResult {
  Eigen::VectorXd best;
  double value;
  int iterations;
};

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, double scale, double target,
                          int max_iterations) {
  const Eigen::Index n = start.size();
  std::vector<Eigen::VectorXd> pts(n + 1, start);
  std::vector<double> val(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) pts[i + 1][i] += scale;
  for (Eigen::Index i = 0; i <= n; ++i) val[i] = f(pts[i]);

  std::vector<Eigen::Index> order(n + 1);
  int it = 0;
  for (; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    const Eigen::Index lo = order.front(), hi = order.back(), second = order[n - 1];
    if (val[lo] <= target) break;
    double diameter = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i)
      diameter = std::max(diameter, (pts[i] - pts[lo]).cwiseAbs().maxCoeff());
    if (diameter <= 1e-15 * (1.0 + pts[lo].norm())) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i <= n; ++i)
      if (i != hi) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - pts[hi]);
    const double fr = f(reflected);
    if (fr < val[lo]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[hi]);
      const double fe = f(expanded);
      if (fe < fr) {
        pts[hi] = expanded;
        val[hi] = fe;
      } else {
        pts[hi] = reflected;
        val[hi] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[hi] = reflected;
      val[hi] = fr;
      continue;
    }
    const bool outside = fr < val[hi];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (pts[hi] - centroid));
    const double fc = f(contracted);
    if (fc < (outside ? fr : val[hi])) {
      pts[hi] = contracted;
      val[hi] = fc;
      continue;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i == lo) continue;
      pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
      val[i] = f(pts[i]);
    }
  }
  const auto best = std::min_element(val.begin(), val.end()) - val.begin();
  return {pts[best], val[best], it};
}

constexpr double kPenalty = 1e6;

}  // namespace

GeodesicPath integrate_geodesic(const ChristoffelField& gamma, const GeodesicState& start,
                                double duration, double dt) {
  if (!(dt > 0.0)) throw GeometryError(ErrorKind::kDegenerateGrid, "dt must be positive");
  const MetricSection& section = gamma.section;
  const Chart& chart = section.chart;
  check_inside(chart, start.position);

  const int steps = duration > 0.0 ? step_count(duration, dt) : 0;
  const double h = steps ? duration / steps : 0.0;
  GeodesicPath path;
  path.metric_label = section.label;
  path.times.reserve(steps + 1);
  path.states.reserve(steps + 1);
  path.speeds.reserve(steps + 1);

  Coords x = chart.wrap(start.position);
  Eigen::VectorXd v = start.velocity;
  const auto record = [&](double t) {
    path.times.push_back(t);
    path.speeds.push_back(form_norm(section.sampler(x), v));
    path.states.push_back({x, v});
  };
  record(0.0);
  for (int s = 1; s <= steps; ++s) {
    rk4_step(gamma, x, v, h);
    x = chart.wrap(x);
    check_inside(chart, x);
    record(s == steps ? duration : s * h);
  }
  return path;
}

Coords exponential_map(const ChristoffelField& gamma, const Coords& x, const Eigen::VectorXd& v,
                       double dt) {
  if (v.isZero(0.0)) return x;
  return shoot(gamma, x, v, 1.0, dt);
}

DistanceResult shooting_distance(const MetricSection& section, const Coords& p, const Coords& q,
                                 const DistanceConfig& cfg) {
  const Chart& chart = section.chart;
  const int n = section.dim();
  const ChristoffelField gamma = levi_civita(section);
  const Matrix gp = section.sampler(p);
  const Eigen::LLT<Matrix> chol(gp);
  if (chol.info() != Eigen::Success) throw GeometryError(ErrorKind::kSingularMetric, section.label);
  const Matrix lower = chol.matrixL();
  const Coords delta = chart.displacement(p, q);
  const double estimate = form_norm(gp, delta);

  DistanceResult result;
  result.solver = DistanceSolver::kShooting;
  if (estimate == 0.0) {
    result.converged = true;
    result.path = integrate_geodesic(gamma, {p, Eigen::VectorXd::Zero(n)}, 0.0, cfg.dt);
    return result;
  }

  // w parameterizes the initial velocity v = L^{-T} w, so |v|_g = |w|: the
  // direction of w is a unit g-direction and |w| the shooting length.
  const auto velocity_of = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return lower.transpose().triangularView<Eigen::Upper>().solve(w);
  };
  const auto miss = [&](const Eigen::VectorXd& w, double dt) {
    const double length = w.norm();
    if (length > cfg.duration_cap * estimate) return kPenalty + length;
    if (length == 0.0) return chart.displacement(p, q).norm();
    try {
      const Coords end = shoot(gamma, p, velocity_of(w) / length, length, dt);
      return chart.displacement(end, q).norm();
    } catch (const GeometryError&) {
      return kPenalty;
    }
  };

  const Eigen::VectorXd seed = lower.transpose() * delta;
  std::vector<Eigen::VectorXd> starts;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < std::max(1, cfg.starts); ++k) {
    if (k == 0) {
      starts.push_back(seed);
    } else if (n == 2) {
      const double a = 2.0 * kPi * k / cfg.starts;
      const Eigen::Rotation2D<double> rot(a);
      starts.push_back(rot.toRotationMatrix() * seed);
    } else {
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = normal(rng);
      starts.push_back(w.normalized() * estimate);
    }
  }
  // Nelder-Mead first on a coarse step (cheap, lands within the coarse
  // integrator error), then a polish at the requested step from there.
  const double coarse = cfg.dt * std::max(1.0, cfg.coarse_factor);
  std::vector<double> start_miss;
  for (const auto& w : starts) start_miss.push_back(miss(w, coarse));
  std::vector<std::size_t> order(starts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return start_miss[a] < start_miss[b]; });

  const double target = cfg.tolerance * cfg.tolerance;
  const auto squared_at = [&miss](double dt) {
    return [&miss, dt](const Eigen::VectorXd& w) {
      const double m = miss(w, dt);
      return m * m;
    };
  };

  // Among converged refinements keep the shortest; otherwise the smallest miss.
  Eigen::VectorXd best_w = starts[order.front()];
  double best_miss = std::numeric_limits<double>::infinity();
  const int refine = std::min<int>(std::max(1, cfg.refine_starts), static_cast<int>(order.size()));
  for (int r = 0; r < refine; ++r) {
    Eigen::VectorXd w = starts[order[r]];
    if (coarse > cfg.dt) {
      const double coarse_target = std::pow(std::max(cfg.tolerance, cfg.coarse_tolerance), 2);
      w = nelder_mead(squared_at(coarse), w, 0.05 * estimate, coarse_target, cfg.max_iterations)
              .best;
    }
    // The polish simplex starts at the size of the remaining fine-step miss.
    const double scale =
        coarse > cfg.dt ? std::clamp(2.0 * miss(w, cfg.dt), 1e-12, 0.05 * estimate) : 0.05 * estimate;
    const SimplexResult s = nelder_mead(squared_at(cfg.dt), w, scale, target, cfg.max_iterations);
    const double m = std::sqrt(s.value);
    const bool ok = m < cfg.tolerance;
    const bool have = best_miss < cfg.tolerance;
    if ((ok && (!have || s.best.norm() < best_w.norm())) || (!ok && !have && m < best_miss)) {
      best_w = s.best;
      best_miss = m;
    }
    if (best_miss < cfg.tolerance && !cfg.refine_all) break;
  }

  result.residual = best_miss;
  result.converged = best_miss < cfg.tolerance;
  const double length = best_w.norm();
  try {
    result.path = integrate_geodesic(gamma, {p, velocity_of(best_w) / length}, length, cfg.dt);
    result.distance = result.path.length();
  } catch (const GeometryError&) {
    result.converged = false;
    result.distance = length;
  }
  return result;
}

DistanceResult energy_descent_distance(const MetricSection& section, const Coords& p,
                                       const Coords& q, const DistanceConfig& cfg) {
  const Chart& chart = section.chart;
  const int n = section.dim();
  const int segments = std::max(2, cfg.segments);
  const int interior = segments - 1;
  const Coords delta = chart.displacement(p, q);

  Matrix nodes(segments + 1, n);
  for (int k = 0; k <= segments; ++k)
    nodes.row(k) = (p + delta * (static_cast<double>(k) / segments)).transpose();

  const auto energy = [&](const Matrix& xs) {
    double e = 0.0;
    for (int k = 0; k < segments; ++k) {
      const Eigen::VectorXd d = (xs.row(k + 1) - xs.row(k)).transpose();
      const Coords mid = 0.5 * (xs.row(k + 1) + xs.row(k)).transpose();
      e += bilinear(section.sampler(mid), d, d);
    }
    return e * segments;
  };
  const auto inside = [&](const Matrix& xs) {
    for (int k = 0; k <= segments; ++k)
      if (!chart.interior(xs.row(k).transpose())) return false;
    return true;
  };

  // Sobolev preconditioner: discrete Laplacian (x) reference metric, the
  // Hessian of the energy for a constant metric.
  const Matrix gref = section.sampler(p);
  Matrix lap = Matrix::Zero(interior, interior);
  for (int k = 0; k < interior; ++k) {
    lap(k, k) = 2.0;
    if (k > 0) lap(k, k - 1) = -1.0;
    if (k + 1 < interior) lap(k, k + 1) = -1.0;
  }
  const Eigen::LDLT<Matrix> lap_solver(lap * (2.0 * segments));
  const Eigen::LDLT<Matrix> metric_solver(gref);

  DistanceResult result;
  result.solver = DistanceSolver::kEnergyDescent;
  double e = energy(nodes);
  bool converged = false;
  for (int it = 0; it < cfg.descent_iterations; ++it) {
    Matrix grad = Matrix::Zero(interior, n);
    for (int k = 0; k < segments; ++k) {
      const Eigen::VectorXd d = (nodes.row(k + 1) - nodes.row(k)).transpose();
      const Coords mid = 0.5 * (nodes.row(k + 1) + nodes.row(k)).transpose();
      const Matrix g = section.sampler(mid);
      const std::vector<Matrix> dg = metric_derivatives(section, mid);
      Eigen::VectorXd half_dg(n);
      for (int l = 0; l < n; ++l) half_dg[l] = 0.5 * bilinear(dg[l], d, d);
      const Eigen::VectorXd gd = 2.0 * (g * d);
      // Segment k joins nodes k and k+1; interior node j sits at row j-1.
      if (k >= 1) grad.row(k - 1) += segments * (half_dg - gd).transpose();
      if (k + 1 <= interior) grad.row(k) += segments * (half_dg + gd).transpose();
    }
    Matrix step = lap_solver.solve(grad);
    step = metric_solver.solve(step.transpose()).transpose();

    double eta = 1.0;
    bool accepted = false;
    Matrix trial = nodes;
    for (int halving = 0; halving < 40; ++halving, eta *= 0.5) {
      trial.middleRows(1, interior) = nodes.middleRows(1, interior) - eta * step;
      if (!inside(trial)) continue;
      const double et = energy(trial);
      if (et <= e) {
        accepted = true;
        e = et;
        break;
      }
    }
    const double scale = 1.0 + delta.norm();
    if (!accepted) {
      // Energy can no longer decrease: stationary up to roundoff, or stuck.
      converged = step.cwiseAbs().maxCoeff() < 1e-8 * scale;
      break;
    }
    nodes = trial;
    if (eta * step.cwiseAbs().maxCoeff() < cfg.descent_tolerance * scale) {
      converged = true;
      break;
    }
  }

  GeodesicPath path;
  path.metric_label = section.label;
  double length = 0.0;
  for (int k = 0; k <= segments; ++k) {
    const double t = static_cast<double>(k) / segments;
    const int a = std::min(k, segments - 1);
    const Eigen::VectorXd d = (nodes.row(a + 1) - nodes.row(a)).transpose() * segments;
    const Coords x = nodes.row(k).transpose();
    path.times.push_back(t);
    path.states.push_back({chart.wrap(x), d});
    if (k < segments) {
      const Coords mid = 0.5 * (nodes.row(k + 1) + nodes.row(k)).transpose();
      length += form_norm(section.sampler(mid), d) / segments;
    }
    path.speeds.push_back(form_norm(section.sampler(x), d));
  }
  result.path = std::move(path);
  result.distance = length;
  result.converged = converged;
  result.residual = 0.0;
  return result;
}

DistanceResult geodesic_distance(const MetricSection& section, const Coords& p, const Coords& q,
                                 const DistanceConfig& cfg) {
  if (!section.chart.interior(p) || !section.chart.interior(q))
    throw GeometryError(ErrorKind::kPointOutsideDomain, "geodesic_distance on " + section.label);
  DistanceResult shot = shooting_distance(section, p, q, cfg);
  if (shot.converged && !cfg.always_run_descent) return shot;
  DistanceResult descent = energy_descent_distance(section, p, q, cfg);
  if (shot.converged && descent.converged)
    return descent.distance < shot.distance ? descent : shot;
  if (shot.converged) return shot;
  if (descent.converged) return descent;
  return shot.residual <= descent.residual ? shot : descent;
}

std::vector<DistanceResult> multi_distance(const MultiMetricFamily& family, const Coords& p,
                                           const Coords& q, const DistanceConfig& cfg) {
  validate_family(family);
  std::vector<DistanceResult> out;
  out.reserve(family.size());
  for (const auto& member : family.members) out.push_back(geodesic_distance(member, p, q, cfg));
  return out;
}

std::vector<Coords> probe_points(const Chart& chart, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = chart.dim();
  std::vector<double> lo(n), width(n);
  for (int i = 0; i < n; ++i) {
    const AxisRange& axis = chart.domain[i];
    if (axis.periodic) {
      width[i] = axis.length() / 4.0;
      lo[i] = axis.lower + unit(rng) * axis.length();
    } else {
      width[i] = axis.length() / 2.0;
      lo[i] = axis.lower + axis.length() / 4.0;
    }
  }
  std::vector<Coords> pts;
  for (int c = 0; c < count; ++c) {
    Coords x(n);
    for (int i = 0; i < n; ++i) x[i] = lo[i] + unit(rng) * width[i];
    pts.push_back(chart.wrap(x));
  }
  return pts;
}

double sphere_arc_distance(double radius, const Coords& p, const Coords& q) {
  const auto unit = [](const Coords& x) {
    return Eigen::Vector3d(std::sin(x[0]) * std::cos(x[1]), std::sin(x[0]) * std::sin(x[1]),
                           std::cos(x[0]));
  };
  const double c = std::clamp(unit(p).dot(unit(q)), -1.0, 1.0);
  // atan2 form stays accurate for nearly coincident points.
  return radius * std::atan2(unit(p).cross(unit(q)).norm(), c);
}

ProbeReport hopf_rinow_probe(const MetricSection& section, int trials, std::uint64_t seed,
                             const DistanceConfig& cfg, const std::optional<DistanceOracle>& oracle) {
  ProbeReport report;
  report.trials = trials;
  if (oracle) report.worst_oracle_relative = 0.0;
  std::mt19937_64 seeds(seed);
  for (int t = 0; t < trials; ++t) {
    const std::vector<Coords> pts = probe_points(section.chart, seeds(), 3);
    const Coords &p = pts[0], &q = pts[1], &r = pts[2];
    const DistanceResult pq = geodesic_distance(section, p, q, cfg);
    const DistanceResult qp = geodesic_distance(section, q, p, cfg);
    const DistanceResult pr = geodesic_distance(section, p, r, cfg);
    const DistanceResult qr = geodesic_distance(section, q, r, cfg);
    if (pq.converged && qp.converged && pr.converged && qr.converged) ++report.converged;
    report.worst_symmetry = std::max(report.worst_symmetry, std::abs(pq.distance - qp.distance));
    report.worst_triangle =
        std::max(report.worst_triangle, std::max(pr.distance - pq.distance - qr.distance, 0.0));
    if (oracle) {
      const double exact = (*oracle)(p, q);
      if (exact > 0.0)
        report.worst_oracle_relative =
            std::max(*report.worst_oracle_relative, std::abs(pq.distance - exact) / exact);
    }
  }
  return report;
}

}  // namespace mbgeom
