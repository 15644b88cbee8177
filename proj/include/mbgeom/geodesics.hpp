#pragma once

#include "mbgeom/connection.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mbgeom {

struct GeodesicState {
  Coords position;
  Eigen::VectorXd velocity;
};

struct GeodesicPath {
  std::vector<double> times;
  std::vector<GeodesicState> states;
  std::vector<double> speeds;  // |velocity|_g at each sample
  std::string metric_label;

  const GeodesicState& back() const { return states.back(); }
  /// max |speed - speed_0| / speed_0 (0 for a resting path).
  double max_speed_drift() const;
  /// Trapezoidal g-length.
  double length() const;
};

/// Classic RK4 on x'' = -Γ(x)(x', x'). Periodic axes wrap after every step.
/// Throws kTrajectoryExitsDomain if a non-periodic axis is left.
GeodesicPath integrate_geodesic(const ChristoffelField& gamma, const GeodesicState& start,
                                double duration, double dt = 1e-3);

Coords exponential_map(const ChristoffelField& gamma, const Coords& x, const Eigen::VectorXd& v,
                       double dt = 1e-3);

enum class DistanceSolver { kShooting, kEnergyDescent };

struct DistanceConfig {
  int starts = 16;
  int refine_starts = 3;         // seeds tried in order of initial miss until one converges
  bool refine_all = false;       // refine every one of them and keep the shortest
  double tolerance = 1e-10;      // endpoint miss in coordinates
  int max_iterations = 2000;     // Nelder-Mead iterations per refinement
  double dt = 1e-3;
  double coarse_factor = 10.0;   // first Nelder-Mead pass integrates with dt * coarse_factor
  double coarse_tolerance = 1e-8;
  double duration_cap = 10.0;    // multiple of the straight-line estimate
  int segments = 64;             // energy-descent polyline
  int descent_iterations = 5000;
  double descent_tolerance = 1e-12;
  bool always_run_descent = false;
};

struct DistanceResult {
  double distance = 0.0;
  GeodesicPath path;
  bool converged = false;
  double residual = 0.0;
  DistanceSolver solver = DistanceSolver::kShooting;
};

/// Shooting from p with multi-start Nelder-Mead; falls back to discrete
/// energy descent when shooting does not converge.
DistanceResult geodesic_distance(const MetricSection& section, const Coords& p, const Coords& q,
                                 const DistanceConfig& cfg = {});

DistanceResult shooting_distance(const MetricSection& section, const Coords& p, const Coords& q,
                                 const DistanceConfig& cfg = {});
DistanceResult energy_descent_distance(const MetricSection& section, const Coords& p,
                                       const Coords& q, const DistanceConfig& cfg = {});

std::vector<DistanceResult> multi_distance(const MultiMetricFamily& family, const Coords& p,
                                           const Coords& q, const DistanceConfig& cfg = {});

struct ProbeReport {
  int trials = 0;
  int converged = 0;
  double worst_symmetry = 0.0;
  double worst_triangle = 0.0;            // max(d(p,r) - d(p,q) - d(q,r), 0)
  std::optional<double> worst_oracle_relative;  // only with an analytic oracle
};

using DistanceOracle = std::function<double(const Coords&, const Coords&)>;

/// Random point triples from a probe region of the chart (a quarter-turn
/// window on angular axes, away from coordinate singularities).
ProbeReport hopf_rinow_probe(const MetricSection& section, int trials, std::uint64_t seed,
                             const DistanceConfig& cfg = {},
                             const std::optional<DistanceOracle>& oracle = std::nullopt);

/// Three random points in the probe window of a built-in chart.
std::vector<Coords> probe_points(const Chart& chart, std::uint64_t seed, int count);

/// Great-circle distance r * arccos(<P, Q>) for sphere coordinates.
double sphere_arc_distance(double radius, const Coords& p, const Coords& q);

}  // namespace mbgeom
