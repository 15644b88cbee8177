#include "mbgeom/geodesics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mbgeom;

namespace {

Coords pt(double a, double b) { return Coords{{a, b}}; }

// Arccos form of the great-circle distance, independent of the library's atan2 form.
double arc(double r, const Coords& p, const Coords& q) {
  const Eigen::Vector3d a(std::sin(p[0]) * std::cos(p[1]), std::sin(p[0]) * std::sin(p[1]), std::cos(p[0]));
  const Eigen::Vector3d b(std::sin(q[0]) * std::cos(q[1]), std::sin(q[0]) * std::sin(q[1]), std::cos(q[0]));
  return r * std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

}  // namespace

TEST_SUITE("geodesics") {

TEST_CASE("straight lines in the flat chart") {
  const ChristoffelField flat = levi_civita(flat_section());
  const GeodesicPath p = integrate_geodesic(flat, {pt(0, 0), Eigen::Vector2d(1, 0)}, 1.0);
  CHECK((p.back().position - pt(1, 0)).norm() < 1e-12);
  CHECK(p.length() == doctest::Approx(1.0));
  CHECK((exponential_map(flat, pt(1, 2), Eigen::Vector2d(0.5, -3)) - pt(1.5, -1)).norm() < 1e-12);
  CHECK(exponential_map(flat, pt(1, 2), Eigen::Vector2d::Zero()) == pt(1, 2));
}

TEST_CASE("the equator closes") {
  const ChristoffelField s = levi_civita(round_sphere_section());
  const GeodesicPath p = integrate_geodesic(s, {pt(kPi / 2, 0.0), Eigen::Vector2d(0, 1)}, 2 * kPi);
  CHECK(sphere_chart().displacement(p.back().position, pt(kPi / 2, 0.0)).norm() < 1e-6);
  const Coords antipode = exponential_map(s, pt(kPi / 2, 0.0), Eigen::Vector2d(0, kPi));
  CHECK(std::abs(antipode[1] - kPi) < 1e-5);
  CHECK(std::abs(antipode[0] - kPi / 2) < 1e-5);
}

TEST_CASE("speed is conserved over long times") {
  const ChristoffelField s = levi_civita(round_sphere_section());
  // Tilted great circle: reaches theta = pi/4 and 3pi/4 and stays off the poles.
  const Eigen::Vector2d v(std::sqrt(0.5), std::sqrt(0.5));
  const GeodesicPath p = integrate_geodesic(s, {pt(kPi / 2, 0.3), v}, 100.0);
  CHECK(p.max_speed_drift() < 1e-5);
  CHECK(p.length() == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("leaving a non-periodic axis is an error") {
  const ChristoffelField flat = levi_civita(flat_section());
  try {
    integrate_geodesic(flat, {pt(9.5, 0), Eigen::Vector2d(1, 0)}, 1.0);
    FAIL("left the box");
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::kTrajectoryExitsDomain);
  }
}

TEST_CASE("fourth-order convergence") {
  const ChristoffelField s = levi_civita(round_sphere_section());
  const GeodesicState start{pt(kPi / 2, 0.0), Eigen::Vector2d(std::sqrt(0.5), std::sqrt(0.5))};
  // Exact: tilted great circle through (1, 0, 0) with initial direction (0, 1, -1)/sqrt2.
  const double t = 3.0;
  const Eigen::Vector3d e = std::cos(t) * Eigen::Vector3d(1, 0, 0) +
                            std::sin(t) * Eigen::Vector3d(0, std::sqrt(0.5), -std::sqrt(0.5));
  const Coords exact = pt(std::acos(e[2]), std::atan2(e[1], e[0]));
  const auto err = [&](double dt) {
    return sphere_chart().displacement(exact, integrate_geodesic(s, start, t, dt).back().position).norm();
  };
  const double e1 = err(0.1), e2 = err(0.05);
  CHECK(e1 / e2 > 8.0);
  CHECK(e1 / e2 < 40.0);
}

TEST_CASE("distances with closed forms") {
  const DistanceResult flat = geodesic_distance(flat_section(), pt(0, 0), pt(3, 4));
  CHECK(flat.converged);
  CHECK(std::abs(flat.distance - 5.0) < 1e-6);

  const DistanceResult quarter = geodesic_distance(round_sphere_section(), pt(kPi / 2, 0), pt(kPi / 2, kPi / 2));
  CHECK(std::abs(quarter.distance - kPi / 2) < 1e-4);
  const DistanceResult big = geodesic_distance(round_sphere_section(2.0), pt(kPi / 2, 0), pt(kPi / 2, kPi / 2));
  CHECK(std::abs(big.distance - kPi) < 1e-4);
  // The equator crossing the seam.
  const DistanceResult seam = geodesic_distance(round_sphere_section(), pt(kPi / 2, 6.0), pt(kPi / 2, 0.3));
  CHECK(std::abs(seam.distance - (2 * kPi - 5.7)) < 1e-6);
  CHECK(geodesic_distance(round_sphere_section(), pt(1, 1), pt(1, 1)).distance == 0.0);
}

TEST_CASE("random sphere pairs against the arccos oracle") {
  std::mt19937_64 rng(31);
  const MetricSection s = round_sphere_section();
  int checked = 0;
  for (int k = 0; checked < 8; ++k) {
    const std::vector<Coords> pts = probe_points(s.chart, 1000 + k, 2);
    const double exact = arc(1.0, pts[0], pts[1]);
    if (exact >= kPi - 0.1) continue;
    ++checked;
    const DistanceResult d = geodesic_distance(s, pts[0], pts[1]);
    CHECK(d.converged);
    CHECK(std::abs(d.distance - exact) < 1e-3 * exact);
    CHECK(std::abs(sphere_arc_distance(1.0, pts[0], pts[1]) - exact) < 1e-12);
  }
}

TEST_CASE("energy descent agrees with shooting") {
  const MetricSection t = torus_section(2, 1);
  const Coords p = pt(0.3, 0.2), q = pt(1.2, 1.0);
  const DistanceResult a = shooting_distance(t, p, q);
  const DistanceResult b = energy_descent_distance(t, p, q);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(b.solver == DistanceSolver::kEnergyDescent);
  CHECK(std::abs(a.distance - b.distance) < 1e-4 * a.distance);

  const DistanceResult e = energy_descent_distance(round_sphere_section(), pt(kPi / 2, 0), pt(kPi / 2, 1.0));
  CHECK(std::abs(e.distance - 1.0) < 1e-4);
}

TEST_CASE("multi distance scales with the metric") {
  const MetricSection flat = flat_section();
  const MultiMetricFamily fam{{flat, scaled_section(flat, 4.0)}, {"g", "4g"}};
  const auto d = multi_distance(fam, pt(0, 0), pt(1, 0));
  CHECK(d[0].distance == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(d[1].distance == doctest::Approx(2.0).epsilon(1e-6));

  const MetricSection s = round_sphere_section();
  const MultiMetricFamily sph{{s, scaled_section(s, 4.0)}, {"r1", "r2"}};
  const auto ds = multi_distance(sph, pt(kPi / 2, 0), pt(kPi / 2, kPi / 2));
  CHECK(std::abs(ds[0].distance - kPi / 2) < 1e-6);
  CHECK(std::abs(ds[1].distance / ds[0].distance - 2.0) < 1e-6);

  const MultiMetricFamily one{{s}, {"g"}};
  CHECK(multi_distance(one, pt(1, 0), pt(2, 1))[0].distance ==
        geodesic_distance(s, pt(1, 0), pt(2, 1)).distance);
}

TEST_CASE("probe on sphere, torus and the flat box") {
  const MetricSection s = round_sphere_section();
  const ProbeReport r = hopf_rinow_probe(
      s, 4, 1, {}, [](const Coords& a, const Coords& b) { return arc(1.0, a, b); });
  CHECK(r.converged == 4);
  CHECK(r.worst_symmetry < 1e-3);
  CHECK(r.worst_triangle < 1e-3);
  REQUIRE(r.worst_oracle_relative);
  CHECK(*r.worst_oracle_relative < 1e-3);

  const ProbeReport t = hopf_rinow_probe(torus_section(), 3, 2);
  CHECK(t.converged == 3);
  CHECK(t.worst_symmetry < 1e-3);
  CHECK_FALSE(t.worst_oracle_relative);

  const DistanceResult corners = geodesic_distance(flat_section(), pt(-9.5, -9.5), pt(9.5, 9.5));
  CHECK(corners.converged);
  CHECK(corners.distance == doctest::Approx(19.0 * std::sqrt(2.0)).epsilon(1e-9));
}

}
