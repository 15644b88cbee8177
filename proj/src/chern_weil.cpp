#include "mbgeom/chern_weil.hpp"

#include <cmath>

namespace mbgeom {

using namespace std::complex_literals;

const char* to_string(IndexFormula formula) {
  switch (formula) {
    case IndexFormula::kDegree: return "degree";
    case IndexFormula::kChTd: return "ch-td";
    case IndexFormula::kChAhat: return "ch-ahat";
    case IndexFormula::kGaussBonnet: return "gauss-bonnet";
  }
  return "unknown";
}

namespace {

void require_surface(const Chart& chart) {
  if (chart.dim() != 2)
    throw GeometryError(ErrorKind::kDimensionMismatch,
                        "characteristic integrals need a 2-dimensional base, got " + chart.label);
}

bool same_coordinates(const Chart& a, const Chart& b) {
  if (a.dim() != b.dim()) return false;
  for (int i = 0; i < a.dim(); ++i)
    if (a.domain[i].lower != b.domain[i].lower || a.domain[i].upper != b.domain[i].upper ||
        a.domain[i].periodic != b.domain[i].periodic)
      return false;
  return true;
}

void require_same_base(const Chart& a, const Chart& b) {
  if (!same_coordinates(a, b))
    throw GeometryError(ErrorKind::kChartMismatch, a.label + " vs " + b.label);
}

/// Curvature with the stencil shrunk near a non-periodic face.
Curvature2Form curvature_at(const BundleConnection& conn, const Coords& x) {
  const double h = std::min(kDefaultFdStep, conn.base_chart.boundary_distance(x) / 2.0);
  return bundle_curvature(conn, x, h);
}

double area_element(const MetricSection& section, const Coords& x) {
  return std::sqrt(std::max(section.sampler(x).determinant(), 0.0));
}

IndexReport make_report(const FormIntegral& integral, IndexFormula formula,
                        std::vector<std::string> inputs) {
  IndexReport r;
  r.raw = integral.real;
  r.rounded = std::lround(integral.real);
  r.gap = std::abs(r.raw - static_cast<double>(r.rounded));
  r.formula = formula;
  r.inputs = std::move(inputs);
  r.imaginary_residue = integral.imag;
  return r;
}

}  // namespace

EvenFormValue chern_character_point(const Curvature2Form& f) {
  EvenFormValue v;
  v.degree0 = static_cast<double>(f.rank());
  if (f.dim() >= 2 && f.rank() > 0) v.degree2 = (0.5i / kPi) * f(0, 1).trace();
  return v;
}

EvenFormValue todd_point(double gaussian_curvature, double area) {
  return {1.0, gaussian_curvature * area / (4.0 * kPi)};
}

EvenFormValue ahat_point(const Coords&) { return {1.0, 0.0}; }

FormIntegral integrate_even_form(const Chart& chart, const GridSpec& spec,
                                 const EvenFormSampler& sampler) {
  require_surface(chart);
  const QuadratureGrid grid = quadrature_grid(chart, spec);
  const std::function<std::complex<double>(const Coords&)> top = [&](const Coords& x) {
    return sampler(x).degree2;
  };
  const std::vector<std::complex<double>> values = evaluate_nodes(grid, top);
  std::vector<double> re(values.size()), im(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    re[k] = grid[k].weight * values[k].real();
    im[k] = grid[k].weight * values[k].imag();
  }
  return {pairwise_sum(re), pairwise_sum(im)};
}

IndexReport first_chern_number(const BundleConnection& conn, const Chart& chart,
                               const GridSpec& spec) {
  require_surface(chart);
  require_same_base(conn.base_chart, chart);
  const FormIntegral integral = integrate_even_form(
      chart, spec, [&](const Coords& x) { return chern_character_point(curvature_at(conn, x)); });
  return make_report(integral, IndexFormula::kDegree, {conn.label, chart.label});
}

IndexReport gauss_bonnet(const MetricSection& section, const GridSpec& spec) {
  require_surface(section.chart);
  const FormIntegral integral =
      integrate_even_form(section.chart, spec, [&](const Coords& x) -> EvenFormValue {
        return {0.0, gaussian_curvature(section, x) * area_element(section, x) / (2.0 * kPi)};
      });
  return make_report(integral, IndexFormula::kGaussBonnet, {section.label});
}

IndexReport index_ch_td(const BundleConnection& conn, const MetricSection& section,
                        const Chart& chart, const GridSpec& spec) {
  require_surface(chart);
  require_same_base(conn.base_chart, chart);
  require_same_base(section.chart, chart);
  const FormIntegral integral = integrate_even_form(chart, spec, [&](const Coords& x) {
    const EvenFormValue ch = chern_character_point(curvature_at(conn, x));
    const EvenFormValue td = todd_point(gaussian_curvature(section, x), area_element(section, x));
    return ch * td;
  });
  return make_report(integral, IndexFormula::kChTd, {conn.label, section.label});
}

IndexReport index_ch_ahat(const BundleConnection& conn, const Chart& chart, const GridSpec& spec) {
  require_surface(chart);
  require_same_base(conn.base_chart, chart);
  const FormIntegral integral = integrate_even_form(chart, spec, [&](const Coords& x) {
    return chern_character_point(curvature_at(conn, x)) * ahat_point(x);
  });
  return make_report(integral, IndexFormula::kChAhat, {conn.label, chart.label});
}

// ---------------------------------------------------------------------------

BundleConnection whitney_sum(const BundleConnection& a, const BundleConnection& b) {
  require_same_base(a.base_chart, b.base_chart);
  const int ra = a.rank, rb = b.rank;
  return {ra + rb, a.base_chart,
          [ca = a.coefficients, cb = b.coefficients, ra, rb](const Coords& x) {
            const auto blocks_a = ca(x);
            const auto blocks_b = cb(x);
            std::vector<ComplexMatrix> out;
            out.reserve(blocks_a.size());
            for (std::size_t mu = 0; mu < blocks_a.size(); ++mu) {
              ComplexMatrix m = ComplexMatrix::Zero(ra + rb, ra + rb);
              if (ra > 0) m.topLeftCorner(ra, ra) = blocks_a[mu];
              if (rb > 0) m.bottomRightCorner(rb, rb) = blocks_b[mu];
              out.push_back(std::move(m));
            }
            return out;
          },
          a.label + "(+)" + b.label};
}

BundleConnection whitney_sum(const std::vector<BundleConnection>& bundles) {
  if (bundles.empty())
    throw GeometryError(ErrorKind::kIndexOutOfRange, "whitney_sum of an empty list");
  BundleConnection total = bundles.front();
  for (std::size_t i = 1; i < bundles.size(); ++i) total = whitney_sum(total, bundles[i]);
  return total;
}

double whitney_block_defect(const BundleConnection& a, const BundleConnection& b, const Coords& x) {
  const Curvature2Form f = curvature_at(whitney_sum(a, b), x);
  double worst = 0.0;
  for (int mu = 0; mu < f.dim(); ++mu)
    for (int nu = 0; nu < f.dim(); ++nu) {
      const ComplexMatrix& m = f(mu, nu);
      if (a.rank > 0 && b.rank > 0) {
        worst = std::max(worst, m.topRightCorner(a.rank, b.rank).cwiseAbs().maxCoeff());
        worst = std::max(worst, m.bottomLeftCorner(b.rank, a.rank).cwiseAbs().maxCoeff());
      }
    }
  return worst;
}

ChAdditivity ch_additivity_check(const std::vector<BundleConnection>& bundles, const Chart& chart,
                                 const GridSpec& spec) {
  require_surface(chart);
  const BundleConnection total = whitney_sum(bundles);
  require_same_base(total.base_chart, chart);
  const QuadratureGrid grid = quadrature_grid(chart, spec);
  const std::function<ChAdditivity(const Coords&)> defect = [&](const Coords& x) {
    const EvenFormValue whole = chern_character_point(curvature_at(total, x));
    EvenFormValue parts;
    for (const auto& b : bundles) parts += chern_character_point(curvature_at(b, x));
    return ChAdditivity{std::abs(whole.degree0 - parts.degree0),
                        std::abs(whole.degree2 - parts.degree2)};
  };
  ChAdditivity worst;
  for (const auto& d : evaluate_nodes(grid, defect)) {
    worst.degree0 = std::max(worst.degree0, d.degree0);
    worst.degree2 = std::max(worst.degree2, d.degree2);
  }
  return worst;
}

AdditivityReport index_additivity_check(const std::vector<BundleConnection>& bundles,
                                        const MetricSection& section, const Chart& chart,
                                        const GridSpec& spec) {
  AdditivityReport r;
  r.direct_sum = index_ch_td(whitney_sum(bundles), section, chart, spec);
  for (const auto& b : bundles) {
    r.parts.push_back(index_ch_td(b, section, chart, spec));
    r.rhs += r.parts.back().raw;
  }
  r.lhs = r.direct_sum.raw;
  r.gap = std::abs(r.lhs - r.rhs);
  return r;
}

// ---------------------------------------------------------------------------

K0Element::K0Element(std::vector<BundleClass> plus, std::vector<BundleClass> minus)
    : plus_(std::move(plus)), minus_(std::move(minus)) {
  for (const auto& c : plus_) {
    reduced_.rank += c.rank;
    reduced_.degree += c.degree;
  }
  for (const auto& c : minus_) {
    reduced_.rank -= c.rank;
    reduced_.degree -= c.degree;
  }
}

BundleClass k0_class(const BundleConnection& conn, const Chart& chart, const GridSpec& spec) {
  const IndexReport degree = first_chern_number(conn, chart, spec);
  if (degree.gap >= kClassGapLimit)
    throw GeometryError(ErrorKind::kCoarseGrid,
                        "degree of " + conn.label + " is not near an integer; refine the grid");
  return {conn.rank, degree.rounded, degree.raw};
}

K0Element k0_combine(const K0Element& a, const K0Element& b, K0Op op) {
  std::vector<BundleClass> plus = a.plus();
  std::vector<BundleClass> minus = a.minus();
  const auto& to_plus = op == K0Op::kAdd ? b.plus() : b.minus();
  const auto& to_minus = op == K0Op::kAdd ? b.minus() : b.plus();
  plus.insert(plus.end(), to_plus.begin(), to_plus.end());
  minus.insert(minus.end(), to_minus.begin(), to_minus.end());
  return {std::move(plus), std::move(minus)};
}

}  // namespace mbgeom
