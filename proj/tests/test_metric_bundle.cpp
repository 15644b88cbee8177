#include "mbgeom/metric_bundle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mbgeom;

namespace {

Coords pt(double a, double b) { return Coords{{a, b}}; }

Matrix random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  return a.transpose() * a + Matrix::Identity(n, n);
}

}  // namespace

TEST_SUITE("metric_bundle") {

TEST_CASE("spd validation") {
  const SpdReport id = validate_spd(Matrix::Identity(3, 3));
  CHECK(id.pass);
  CHECK(id.symmetry_defect == 0.0);
  CHECK(id.min_eigenvalue == doctest::Approx(1.0));
  CHECK_FALSE(validate_spd(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix()).pass);
  Matrix skew = Matrix::Identity(2, 2);
  skew(0, 1) = 0.5;
  CHECK_FALSE(validate_spd(skew).pass);

  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const Matrix g = random_spd(rng, 4);
    const SpdReport r = validate_spd(g);
    CHECK(r.pass);
    const double direct = Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues().minCoeff();
    CHECK(direct >= 1.0 - 1e-12);
    CHECK(r.min_eigenvalue == doctest::Approx(direct));
  }
}

TEST_CASE("metric norm against a double loop") {
  CHECK(metric_norm({pt(0, 0), Matrix::Identity(2, 2)}, {pt(0, 0), Eigen::Vector2d(3, 4)}) ==
        doctest::Approx(5.0));
  CHECK(metric_norm({pt(0, 0), Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix()},
                    {pt(0, 0), Eigen::Vector2d(1, 0)}) == doctest::Approx(2.0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 4;
    const Matrix g = random_spd(rng, n);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += v[i] * g(i, j) * v[j];
    const Coords base = Coords::Zero(n);
    CHECK(std::abs(metric_norm({base, g}, {base, v}) - std::sqrt(s)) <= 1e-12 * std::sqrt(s));
  }
}

TEST_CASE("metric norm rejects mismatched input") {
  const MetricFiber f{pt(0, 0), Matrix::Identity(2, 2)};
  CHECK_THROWS_AS(metric_norm(f, {pt(0, 1), Eigen::Vector2d(1, 0)}), GeometryError);
  CHECK_THROWS_AS(metric_norm(f, {pt(0, 0), Eigen::Vector3d(1, 0, 0)}), GeometryError);
}

TEST_CASE("multi norm of scaled and conformal families") {
  const MetricSection s = round_sphere_section();
  MultiMetricFamily fam{{s, scaled_section(s, 4.0)}, {"g", "4g"}};
  const Eigen::VectorXd n = multi_norm(fam, pt(kPi / 2, 0.2), Eigen::Vector2d(0, 1));
  CHECK(n[0] == doctest::Approx(1.0));
  CHECK(n[1] == doctest::Approx(2.0));

  MultiMetricFamily single{{s}, {"g"}};
  const Coords x = pt(1.0, 2.0);
  const Eigen::Vector2d v(0.3, -0.8);
  CHECK(multi_norm(single, x, v)[0] == metric_norm(section_evaluate(s, x), {x, v}));

  MultiMetricFamily conf{{s, conformal_section(s, [](const Coords&) { return 1.0; }, "1")},
                         {"g", "e2g"}};
  const Eigen::VectorXd c = multi_norm(conf, pt(kPi / 2, 0.0), Eigen::Vector2d(0, 1));
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("norm axioms hold to roundoff") {
  const AxiomReport id = norm_axiom_check({pt(0, 0), Matrix::Identity(2, 2)}, 1000, 1);
  CHECK(id.worst() < 1e-9);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    const Matrix g = 1e3 * random_spd(rng, 3);
    const AxiomReport r = norm_axiom_check({Coords::Zero(3), g}, 1000, k);
    CHECK(r.worst() < 1e-9 * std::max(1.0, r.norm_scale));
  }
}

TEST_CASE("section evaluation") {
  const MetricSection id = constant_section(flat_chart(), Matrix::Identity(2, 2), "id");
  const MetricFiber f = section_evaluate(id, pt(1.0, 2.0));
  CHECK(f.point == pt(1.0, 2.0));
  CHECK(f.form == Matrix::Identity(2, 2));

  const MetricFiber s = section_evaluate(induced_section(sphere_chart()), pt(kPi / 3, 0.1));
  CHECK(s.form(1, 1) == doctest::Approx(0.75));
  CHECK(s.form(0, 0) == doctest::Approx(1.0));

  const MetricSection bad{flat_chart(), [](const Coords&) {
                            return Matrix(Eigen::Vector2d(1, -1).asDiagonal());
                          }, "bad"};
  try {
    section_evaluate(bad, pt(0, 0));
    FAIL("indefinite form accepted");
  } catch (const GeometryError& e) {
    CHECK(e.kind() == ErrorKind::kInvalidSection);
  }
  CHECK_THROWS_AS(section_evaluate(id, pt(20.0, 0.0)), GeometryError);
}

TEST_CASE("subbundle predicates") {
  const SubbundlePredicate diag = diagonal_predicate();
  CHECK(subbundle_contains(diag, {pt(0, 0), Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix()}));
  Matrix off(2, 2);
  off << 1, 0.5, 0.5, 1;
  CHECK_FALSE(subbundle_contains(diag, {pt(0, 0), off}));

  const SubbundlePredicate conf =
      conformal_predicate(constant_section(flat_chart(), Matrix::Identity(2, 2), "id"));
  const Matrix seven = 7.0 * Matrix::Identity(2, 2);
  CHECK(subbundle_contains(conf, {pt(1, 1), seven}));
  CHECK(conformal_factor(seven, Matrix::Identity(2, 2)).value() == doctest::Approx(7.0));
  CHECK_FALSE(subbundle_contains(conf, {pt(1, 1), off}));
  // Not SPD, so not in any subbundle.
  CHECK_FALSE(subbundle_contains(diag, {pt(0, 0), Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix()}));
}

TEST_CASE("norm equivalence constants") {
  const Matrix id = Matrix::Identity(2, 2);
  const EquivalenceConstants scale = norm_equivalence_constants(4.0 * id, id);
  CHECK(scale.lower == doctest::Approx(2.0));
  CHECK(scale.upper == doctest::Approx(2.0));
  const EquivalenceConstants same = norm_equivalence_constants(id, id);
  CHECK(same.lower == doctest::Approx(1.0));

  const Matrix g = Eigen::Vector2d(1, 9).asDiagonal();
  const EquivalenceConstants c = norm_equivalence_constants(g, id);
  CHECK(std::abs(c.lower - 1.0) < 1e-9);
  CHECK(std::abs(c.upper - 3.0) < 1e-9);
  // Brute-force sweep of the ratio |v|_g / |v|.
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  double lo = 1e300, hi = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const Eigen::Vector2d v(normal(rng), normal(rng));
    const double r = std::sqrt(v[0] * v[0] + 9 * v[1] * v[1]) / v.norm();
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(c.lower <= lo + 1e-12);
  CHECK(c.upper >= hi - 1e-12);
  CHECK(lo - c.lower < 1e-3);
  CHECK(c.upper - hi < 1e-3);

  const MetricSection s = round_sphere_section();
  MultiMetricFamily fam{{s, scaled_section(s, 4.0)}, {"g", "4g"}};
  const EquivalenceConstants f = norm_equivalence_constants(fam, pt(1.0, 1.0), 1, 0);
  CHECK(f.lower == doctest::Approx(2.0));
  CHECK(f.upper == doctest::Approx(2.0));
  CHECK_THROWS_AS(norm_equivalence_constants(fam, pt(1.0, 1.0), 2, 0), GeometryError);
}

TEST_CASE("family validation and continuity") {
  MultiMetricFamily mixed{{round_sphere_section(), flat_section()}, {"s", "f"}};
  CHECK_THROWS_AS(validate_family(mixed), GeometryError);

  const std::vector<Coords> pts{pt(1.0, 1.0), pt(2.0, 3.0)};
  CHECK(lipschitz_estimate(round_sphere_section(), pts) < 2.0);
  const MetricSection jump{flat_chart(), [](const Coords& x) {
                             return Matrix((x[0] < 1.0 ? 1.0 : 2.0) * Matrix::Identity(2, 2));
                           }, "jump"};
  CHECK(lipschitz_estimate(jump, {pt(1.0 - 5e-7, 0.0)}) > 1e5);
}

TEST_CASE("built-in sections agree with their embeddings") {
  const MetricSection sphere = round_sphere_section(2.0);
  const MetricSection torus = torus_section(2.0, 1.0);
  for (double u : {0.4, 1.3, 2.9}) {
    CHECK((sphere.sampler(pt(u, 0.5)) - induced_metric(sphere_chart(2.0), pt(u, 0.5)))
              .cwiseAbs().maxCoeff() < 1e-12);
    CHECK((torus.sampler(pt(u, 0.5)) - induced_metric(torus_chart(), pt(u, 0.5)))
              .cwiseAbs().maxCoeff() < 1e-12);
  }
}

}
