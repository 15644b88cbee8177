#include "mbgeom/chern_weil.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mbgeom;

namespace {

Coords pt(double a, double b) { return Coords{{a, b}}; }

GridSpec sphere_grid() { return default_grid(sphere_chart(), {128, 256}); }

}  // namespace

TEST_SUITE("chern_weil") {

TEST_CASE("pointwise characteristic forms") {
  const Curvature2Form flat(3, 2, pt(1, 1));
  const EvenFormValue ch = chern_character_point(flat);
  CHECK(ch.degree0 == std::complex<double>(3.0, 0.0));
  CHECK(ch.degree2 == std::complex<double>(0.0, 0.0));

  for (int n : {-2, 1, 4}) {
    const Coords x = pt(0.9, 2.0);
    const EvenFormValue c = chern_character_point(bundle_curvature(monopole_connection(n), x));
    CHECK(std::abs(c.degree2.real() - n * std::sin(0.9) / (4 * kPi)) < 1e-9);
    CHECK(std::abs(c.degree2.imag()) < 1e-12);
  }

  const EvenFormValue td = todd_point(0.0, 1.0);
  CHECK(td.degree0 == std::complex<double>(1.0, 0.0));
  CHECK(td.degree2 == std::complex<double>(0.0, 0.0));
  const EvenFormValue a = ahat_point(pt(0.3, 0.4));
  CHECK(a.degree0.real() == 1.0);
  CHECK(std::abs(a.degree2) == 0.0);

  // (1 + a)(1 + b) = 1 + (a + b) in degrees <= 2.
  const EvenFormValue p = EvenFormValue{2.0, 0.5} * EvenFormValue{3.0, 0.25};
  CHECK(p.degree0.real() == 6.0);
  CHECK(p.degree2.real() == doctest::Approx(2.0));
}

TEST_CASE("even form integration") {
  const Chart s = sphere_chart();
  const FormIntegral one = integrate_even_form(s, sphere_grid(), [](const Coords& x) {
    return EvenFormValue{0.0, std::sin(x[0]) / (4 * kPi)};
  });
  CHECK(std::abs(one.real - 1.0) < 1e-6);
  CHECK(integrate_even_form(s, sphere_grid(), [](const Coords&) { return EvenFormValue{}; }).real == 0.0);

  const Chart unit{"unit", {{0.0, 1.0, false}, {0.0, 1.0, false}}, {}, {}};
  const FormIntegral c = integrate_even_form(unit, {{4, 4}, QuadratureScheme::kGaussLegendre, {}},
                                             [](const Coords&) { return EvenFormValue{0.0, 1.0}; });
  CHECK(std::abs(c.real - 1.0) < 1e-12);

  // Todd degree-2 part over the sphere and torus.
  const MetricSection sphere = round_sphere_section();
  const FormIntegral ts = integrate_even_form(s, default_grid(s, {64, 128}), [&](const Coords& x) {
    return todd_point(gaussian_curvature(sphere, x), std::sqrt(sphere.sampler(x).determinant()));
  });
  CHECK(std::abs(ts.real - 1.0) < 1e-3);
}

TEST_CASE("first chern numbers") {
  for (int n = -5; n <= 5; ++n) {
    const IndexReport r = first_chern_number(monopole_connection(n), sphere_chart(), sphere_grid());
    CHECK(std::abs(r.raw - n) < 1e-6);
    CHECK(r.rounded == n);
    CHECK(r.formula == IndexFormula::kDegree);
    CHECK(r.imaginary_residue < 1e-12);
  }
  CHECK(first_chern_number(trivial_connection(sphere_chart(), 2), sphere_chart(), sphere_grid()).raw == 0.0);
}

TEST_CASE("gauss-bonnet") {
  CHECK(std::abs(gauss_bonnet(round_sphere_section(), sphere_grid()).raw - 2.0) < 1e-3);
  CHECK(std::abs(gauss_bonnet(round_sphere_section(5.0), default_grid(sphere_chart(5.0), {128, 256})).raw - 2.0) < 1e-3);
  const IndexReport t = gauss_bonnet(torus_section(), default_grid(torus_chart(), {128, 256}));
  CHECK(std::abs(t.raw) < 1e-3);
  CHECK(t.rounded == 0);
}

TEST_CASE("index with the todd class") {
  const MetricSection s = round_sphere_section();
  for (int n = -2; n <= 3; ++n)
    CHECK(std::abs(index_ch_td(monopole_connection(n), s, s.chart, sphere_grid()).raw - (n + 1)) < 2e-3);
  CHECK(std::abs(index_ch_td(trivial_connection(s.chart, 2), s, s.chart, sphere_grid()).raw - 2.0) < 2e-3);
  const MetricSection t = torus_section();
  CHECK(std::abs(index_ch_td(trivial_connection(t.chart, 1), t, t.chart,
                             default_grid(t.chart, {64, 64})).raw) < 2e-3);
  // Monopole defined on the unit sphere chart, metric of radius 3: same coordinates.
  const MetricSection s3 = round_sphere_section(3.0);
  CHECK(std::abs(index_ch_td(monopole_connection(1), s3, s3.chart, sphere_grid()).raw - 2.0) < 2e-3);
  CHECK_THROWS_AS(index_ch_td(monopole_connection(1), t, t.chart, default_grid(t.chart, {8, 8})), GeometryError);
}

TEST_CASE("index with the A-hat class") {
  CHECK(std::abs(index_ch_ahat(trivial_connection(sphere_chart(), 1), sphere_chart(), sphere_grid()).raw) < 1e-9);
  CHECK(std::abs(index_ch_ahat(trivial_connection(torus_chart(), 2), torus_chart(),
                               default_grid(torus_chart(), {32, 32})).raw) < 1e-9);
  for (int n : {-3, 2})
    CHECK(std::abs(index_ch_ahat(monopole_connection(n), sphere_chart(), sphere_grid()).raw - n) < 1e-6);
}

TEST_CASE("whitney sums") {
  const BundleConnection a = monopole_connection(1), b = monopole_connection(2);
  const BundleConnection s = whitney_sum(a, b);
  CHECK(s.rank == 2);
  const Coords x = pt(1.2, 0.4);
  const auto trace = [&](const BundleConnection& c) { return bundle_curvature(c, x)(0, 1).trace(); };
  CHECK(std::abs(trace(s) - trace(a) - trace(b)) < 1e-12);
  CHECK(whitney_block_defect(a, b, x) == 0.0);

  const BundleConnection same = whitney_sum(a, trivial_connection(sphere_chart(), 0));
  CHECK(same.rank == 1);
  CHECK((same.coefficients(x)[1] - a.coefficients(x)[1]).norm() == 0.0);

  CHECK(std::abs(first_chern_number(s, sphere_chart(), sphere_grid()).raw - 3.0) < 1e-6);
  CHECK_THROWS_AS(whitney_sum(a, trivial_connection(torus_chart(), 1)), GeometryError);
}

TEST_CASE("additivity of ch and of the index") {
  const GridSpec g = default_grid(sphere_chart(), {32, 64});
  const std::vector<BundleConnection> two{monopole_connection(1), monopole_connection(2)};
  CHECK(ch_additivity_check(two, sphere_chart(), g).worst() < 1e-12);
  const ChAdditivity single = ch_additivity_check({monopole_connection(4)}, sphere_chart(), g);
  CHECK(single.worst() == 0.0);
  const std::vector<BundleConnection> three{monopole_connection(1), monopole_connection(2), monopole_connection(-3)};
  CHECK(ch_additivity_check(three, sphere_chart(), g).worst() < 1e-12);
  CHECK(std::abs(first_chern_number(whitney_sum(three), sphere_chart(), sphere_grid()).raw) < 1e-6);

  const MetricSection s = round_sphere_section();
  const AdditivityReport r = index_additivity_check(two, s, s.chart, sphere_grid());
  CHECK(r.gap < 1e-6);
  CHECK(std::abs(r.lhs - 5.0) < 2e-3);
  CHECK(r.parts.size() == 2);
  const AdditivityReport c = index_additivity_check({monopole_connection(2), monopole_connection(-2)}, s, s.chart, sphere_grid());
  CHECK(std::abs(c.lhs - 2.0) < 2e-3);
  CHECK(c.gap < 1e-6);

  const MetricSection t = torus_section();
  const AdditivityReport tt = index_additivity_check(
      {trivial_connection(t.chart, 1), trivial_connection(t.chart, 1)}, t, t.chart, default_grid(t.chart, {64, 64}));
  CHECK(std::abs(tt.lhs) < 1e-3);
  CHECK(tt.gap < 1e-6);
}

TEST_CASE("K0 classes") {
  const BundleClass o3 = k0_class(monopole_connection(3), sphere_chart(), sphere_grid());
  CHECK(o3.rank == 1);
  CHECK(o3.degree == 3);
  const BundleClass t2 = k0_class(trivial_connection(sphere_chart(), 2), sphere_chart(), sphere_grid());
  CHECK(t2 == BundleClass{2, 0, 0.0});
  const BundleClass split = k0_class(whitney_sum(monopole_connection(1), monopole_connection(-1)),
                                     sphere_chart(), sphere_grid());
  CHECK(split == t2);
  // Two nodes per axis cannot resolve the degree to 0.01.
  CHECK_THROWS_AS(k0_class(monopole_connection(3), sphere_chart(), {{2, 2}, QuadratureScheme::kMidpoint, {}}),
                  GeometryError);
}

TEST_CASE("K0 group laws") {
  const auto e = [](long r, long d) { return K0Element::of({r, d, double(d)}); };
  CHECK(k0_combine(e(1, 3), e(1, -3), K0Op::kAdd).reduced() == ReducedPair{2, 0});
  const K0Element lhs = k0_combine(k0_combine(e(1, 1), e(1, 2), K0Op::kAdd), e(2, 3), K0Op::kSubtract);
  CHECK(lhs.reduced() == ReducedPair{0, 0});

  std::mt19937_64 rng(77);
  std::uniform_int_distribution<long> rank(0, 4), deg(-9, 9);
  const auto random_element = [&] {
    return k0_combine(e(rank(rng), deg(rng)), e(rank(rng), deg(rng)), K0Op::kSubtract);
  };
  const K0Element zero;
  for (int k = 0; k < 200; ++k) {
    const K0Element a = random_element(), b = random_element(), c = random_element();
    CHECK(k0_combine(a, a, K0Op::kSubtract).reduced() == ReducedPair{0, 0});
    CHECK(k0_combine(a, zero, K0Op::kAdd).reduced() == a.reduced());
    CHECK(k0_combine(a, b, K0Op::kAdd).reduced() == k0_combine(b, a, K0Op::kAdd).reduced());
    CHECK(k0_combine(k0_combine(a, b, K0Op::kAdd), c, K0Op::kAdd).reduced() ==
          k0_combine(a, k0_combine(b, c, K0Op::kAdd), K0Op::kAdd).reduced());
  }
}

}
