#include "mbgeom/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace mbgeom {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

bool RunReport::pass() const {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

namespace {

double parse_number(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw ConfigError("bad number '" + text + "' in '" + context + "'");
  return v;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

/// "k1=v1,k2=v2" -> map.
std::map<std::string, double> parse_params(const std::string& text, const std::string& context) {
  std::map<std::string, double> out;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value in '" + context + "'");
    out[item.substr(0, eq)] = parse_number(item.substr(eq + 1), context);
  }
  return out;
}

double require_param(const std::map<std::string, double>& params, const std::string& key,
                     const std::string& context) {
  const auto it = params.find(key);
  if (it == params.end()) throw ConfigError("missing '" + key + "' in '" + context + "'");
  return it->second;
}

std::function<double(const Coords&)> parse_lambda(const std::string& expr) {
  // forms: <number> | x<k> | <a>*x<k>   (k is 1-based)
  double coeff = 1.0;
  std::string var = expr;
  const auto star = expr.find('*');
  if (star != std::string::npos) {
    coeff = parse_number(expr.substr(0, star), expr);
    var = expr.substr(star + 1);
  }
  if (!var.empty() && var[0] == 'x') {
    const int k = static_cast<int>(parse_number(var.substr(1), expr)) - 1;
    if (k < 0) throw ConfigError("bad coordinate in lambda '" + expr + "'");
    return [coeff, k](const Coords& x) { return coeff * x[k]; };
  }
  if (star != std::string::npos) throw ConfigError("bad lambda '" + expr + "'");
  const double c = parse_number(expr, expr);
  return [c](const Coords&) { return c; };
}

}  // namespace

Chart parse_chart(const std::string& label) {
  if (label == "flat") return flat_chart();
  if (starts_with(label, "sphere:")) {
    const auto p = parse_params(label.substr(7), label);
    const double r = require_param(p, "r", label);
    if (!(r > 0)) throw ConfigError("sphere radius must be positive");
    return sphere_chart(r);
  }
  if (starts_with(label, "torus:")) {
    const auto p = parse_params(label.substr(6), label);
    const double major = require_param(p, "R", label), minor = require_param(p, "r", label);
    if (!(major > minor && minor > 0)) throw ConfigError("torus needs R > r > 0");
    return torus_chart(major, minor);
  }
  if (starts_with(label, "conformal:") || starts_with(label, "scaled:") ||
      starts_with(label, "induced:"))
    return parse_metric(label).chart;
  throw ConfigError("unknown chart '" + label + "'");
}

MetricSection parse_metric(const std::string& label) {
  if (label == "flat") return flat_section();
  if (starts_with(label, "sphere:")) {
    parse_chart(label);  // validates the radius
    return round_sphere_section(parse_params(label.substr(7), label).at("r"));
  }
  if (starts_with(label, "torus:")) {
    const auto p = parse_params(label.substr(6), label);
    parse_chart(label);  // validates R > r > 0
    return torus_section(p.at("R"), p.at("r"));
  }
  if (starts_with(label, "induced:")) return induced_section(parse_chart(label.substr(8)));
  if (starts_with(label, "scaled:")) {
    const std::string rest = label.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw ConfigError("expected scaled:<c>:<metric>");
    const double c = parse_number(rest.substr(0, colon), label);
    if (!(c > 0)) throw ConfigError("scale factor must be positive");
    return scaled_section(parse_metric(rest.substr(colon + 1)), c);
  }
  if (starts_with(label, "conformal:")) {
    const std::string rest = label.substr(10);
    const auto at = rest.rfind(":lambda=");
    if (at == std::string::npos) throw ConfigError("expected conformal:<metric>:lambda=<expr>");
    const std::string expr = rest.substr(at + 8);
    return conformal_section(parse_metric(rest.substr(0, at)), parse_lambda(expr), expr);
  }
  throw ConfigError("unknown metric '" + label + "'");
}

BundleConnection parse_bundle(const std::string& label, const Chart& base) {
  const auto summands = split(label, '+');
  if (summands.size() > 1) {
    std::vector<BundleConnection> parts;
    for (const auto& s : summands) parts.push_back(parse_bundle(s, base));
    return whitney_sum(parts);
  }
  if (starts_with(label, "monopole:")) {
    const auto p = parse_params(label.substr(9), label);
    if (!starts_with(base.label, "sphere:"))
      throw ConfigError("monopole bundles live on the sphere chart");
    return monopole_connection(static_cast<int>(require_param(p, "n", label)), base);
  }
  if (starts_with(label, "trivial:")) {
    const auto p = parse_params(label.substr(8), label);
    const double r = require_param(p, "rank", label);
    if (r < 0) throw ConfigError("rank must be non-negative");
    return trivial_connection(base, static_cast<int>(r));
  }
  throw ConfigError("unknown bundle '" + label + "'");
}

long descriptor_degree(const std::string& label) {
  long total = 0;
  for (const auto& s : split(label, '+'))
    if (starts_with(s, "monopole:"))
      total += std::lround(require_param(parse_params(s.substr(9), s), "n", s));
  return total;
}

// ---------------------------------------------------------------------------

const std::vector<ScenarioInfo>& list_scenarios() {
  static const std::vector<ScenarioInfo> registry = {
      {"gauss-bonnet", "Euler characteristic from (1/2pi) * integral of K dA",
       {"chart", "grid", "tolerance"}},
      {"chern-degree", "First Chern number of each bundle over the sphere",
       {"chart", "bundles", "grid", "tolerance"}},
      {"riemann-roch-scan", "Index integral of ch(O(n)) Td(TS^2) against n + 1",
       {"chart", "n_min", "n_max", "grid", "tolerance"}},
      {"index-additivity", "Index of a Whitney sum against the sum of indices; ch additivity",
       {"chart", "bundles", "grid", "tolerance", "ch_tolerance"}},
      {"multinorm-report", "Norms, norm axioms, equivalence constants and distances of a family",
       {"metrics", "point", "vector", "endpoints", "samples", "seed", "solver"}},
      {"geodesic-probe", "Minimizing-geodesic probes: symmetry, triangle, oracle, drift, RK4 order",
       {"metric", "trials", "seed", "solver", "drift_duration"}},
      {"levi-civita-cert", "Koszul vs Christoffel routes, torsion and metric compatibility",
       {"metrics", "points", "seed"}},
  };
  return registry;
}

namespace {

const ScenarioInfo* find_scenario(const std::string& name) {
  for (const auto& s : list_scenarios())
    if (s.name == name) return &s;
  return nullptr;
}

ojson grid_defaults(const Chart& chart) {
  std::vector<int> counts;
  for (const auto& axis : chart.domain) counts.push_back(axis.periodic ? 256 : 128);
  const GridSpec spec = default_grid(chart, counts);
  return {{"counts", spec.counts}, {"scheme", "gauss-legendre"}, {"margin", spec.margin}};
}

GridSpec grid_from(const ojson& g) {
  GridSpec spec;
  try {
    spec.counts = g.at("counts").get<std::vector<int>>();
    const std::string scheme = g.at("scheme").get<std::string>();
    if (scheme == "gauss-legendre")
      spec.scheme = QuadratureScheme::kGaussLegendre;
    else if (scheme == "midpoint")
      spec.scheme = QuadratureScheme::kMidpoint;
    else
      throw ConfigError("unknown quadrature scheme '" + scheme + "'");
    spec.margin = g.at("margin").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad grid: ") + e.what());
  }
  return spec;
}

DistanceConfig solver_from(const ojson& s) {
  DistanceConfig cfg;
  try {
    cfg.starts = s.at("starts").get<int>();
    cfg.tolerance = s.at("tolerance").get<double>();
    cfg.max_iterations = s.at("max_iterations").get<int>();
    cfg.dt = s.at("dt").get<double>();
    cfg.segments = s.at("segments").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad solver block: ") + e.what());
  }
  if (cfg.starts < 1 || !(cfg.tolerance > 0) || cfg.max_iterations < 1 || !(cfg.dt > 0) ||
      cfg.segments < 2)
    throw ConfigError("solver settings out of range");
  return cfg;
}

ojson solver_defaults() {
  const DistanceConfig d;
  return {{"starts", d.starts},
          {"tolerance", d.tolerance},
          {"max_iterations", d.max_iterations},
          {"dt", d.dt},
          {"segments", d.segments}};
}

/// Fills missing keys of `target` from `defaults` (one level, plus nested objects).
void merge_defaults(ojson& target, const ojson& defaults) {
  for (auto it = defaults.begin(); it != defaults.end(); ++it) {
    if (!target.contains(it.key())) {
      target[it.key()] = it.value();
    } else if (it.value().is_object() && target[it.key()].is_object()) {
      merge_defaults(target[it.key()], it.value());
    }
  }
}

ojson scenario_defaults(const std::string& scenario, const ojson& given) {
  const double half_pi = kPi / 2.0;
  ojson d;
  d["seed"] = 0;
  d["record_timings"] = false;
  d["output"] = {{"format", "json"}};
  if (scenario == "gauss-bonnet") {
    d["chart"] = "sphere:r=1";
    d["tolerance"] = 1e-3;
  } else if (scenario == "chern-degree") {
    d["chart"] = "sphere:r=1";
    d["bundles"] = {"monopole:n=3"};
    d["tolerance"] = 1e-3;
  } else if (scenario == "riemann-roch-scan") {
    d["chart"] = "sphere:r=1";
    d["n_min"] = -3;
    d["n_max"] = 3;
    d["tolerance"] = 2e-3;
  } else if (scenario == "index-additivity") {
    d["chart"] = "sphere:r=1";
    d["bundles"] = {"monopole:n=1", "monopole:n=2"};
    d["tolerance"] = 1e-6;
    d["ch_tolerance"] = 1e-9;
  } else if (scenario == "multinorm-report") {
    d["metrics"] = {"sphere:r=1", "scaled:4:sphere:r=1"};
    d["point"] = {half_pi, 0.3};
    d["vector"] = {0.0, 1.0};
    d["endpoints"] = {{half_pi, 0.0}, {half_pi, half_pi}};
    d["samples"] = 1000;
    d["tolerance"] = 1e-9;
    d["solver"] = solver_defaults();
  } else if (scenario == "geodesic-probe") {
    d["metric"] = "sphere:r=1";
    d["trials"] = 20;
    d["drift_duration"] = 100.0;
    d["tolerance"] = 1e-3;
    d["drift_tolerance"] = 1e-5;
    d["order_ratio"] = 8.0;
    d["solver"] = solver_defaults();
  } else if (scenario == "levi-civita-cert") {
    d["metrics"] = {"sphere:r=1", "torus:R=2,r=1", "conformal:flat:lambda=x1"};
    d["points"] = 100;
    d["agreement_tolerance"] = 1e-7;
    d["torsion_tolerance"] = 1e-9;
    d["compatibility_tolerance"] = 1e-6;
  }
  if (scenario == "gauss-bonnet" || scenario == "chern-degree" ||
      scenario == "riemann-roch-scan" || scenario == "index-additivity") {
    const std::string chart = given.contains("chart") && given["chart"].is_string()
                                  ? given["chart"].get<std::string>()
                                  : d["chart"].get<std::string>();
    d["grid"] = grid_defaults(parse_chart(chart));
  }
  return d;
}

struct Scenario {
  const ojson& cfg;
  RunReport& report;
  std::chrono::steady_clock::time_point phase_start = std::chrono::steady_clock::now();

  void row(std::string name, double raw, std::optional<long> rounded, double tol, bool pass) {
    report.results.push_back({std::move(name), raw, rounded, tol, pass});
  }
  void phase(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    if (cfg["record_timings"].get<bool>())
      report.timings[name] = std::chrono::duration<double>(now - phase_start).count();
    phase_start = now;
  }
};

template <typename T>
T get(const ojson& cfg, const char* key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad '") + key + "': " + e.what());
  }
}

Coords coords_from(const ojson& v, const char* what) {
  try {
    const auto values = v.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad coordinates for ") + what);
  }
}

/// Expected Euler characteristic of a built-in closed surface.
std::optional<long> expected_euler(const std::string& label) {
  if (starts_with(label, "sphere:")) return 2;
  if (starts_with(label, "torus:")) return 0;
  if (starts_with(label, "scaled:") || starts_with(label, "conformal:") ||
      starts_with(label, "induced:")) {
    const Chart c = parse_chart(label);
    return expected_euler(c.label);
  }
  return std::nullopt;
}

void run_gauss_bonnet(Scenario& s) {
  const std::string chart = get<std::string>(s.cfg, "chart");
  const auto expected = expected_euler(chart);
  if (!expected) throw ConfigError("gauss-bonnet needs a closed built-in surface, got " + chart);
  const MetricSection section = parse_metric(chart);
  const double tol = get<double>(s.cfg, "tolerance");
  const IndexReport r = gauss_bonnet(section, grid_from(s.cfg["grid"]));
  s.phase("integrate");
  s.row("euler_characteristic", r.raw, r.rounded, tol, std::abs(r.raw - *expected) < tol);
}

void run_chern_degree(Scenario& s) {
  const Chart chart = parse_chart(get<std::string>(s.cfg, "chart"));
  const GridSpec grid = grid_from(s.cfg["grid"]);
  const double tol = get<double>(s.cfg, "tolerance");
  for (const auto& label : get<std::vector<std::string>>(s.cfg, "bundles")) {
    const BundleConnection conn = parse_bundle(label, chart);
    const IndexReport r = first_chern_number(conn, chart, grid);
    s.row("chern_number:" + label, r.raw, r.rounded, tol,
          std::abs(r.raw - static_cast<double>(descriptor_degree(label))) < tol);
  }
  s.phase("integrate");
}

void run_riemann_roch(Scenario& s) {
  const std::string chart_label = get<std::string>(s.cfg, "chart");
  if (!starts_with(chart_label, "sphere:"))
    throw ConfigError("riemann-roch-scan runs on a sphere chart");
  const MetricSection section = parse_metric(chart_label);
  const GridSpec grid = grid_from(s.cfg["grid"]);
  const double tol = get<double>(s.cfg, "tolerance");
  const int lo = get<int>(s.cfg, "n_min"), hi = get<int>(s.cfg, "n_max");
  if (lo > hi) throw ConfigError("n_min > n_max");
  for (int n = lo; n <= hi; ++n) {
    const IndexReport r =
        index_ch_td(monopole_connection(n, section.chart), section, section.chart, grid);
    s.row("index_ch_td:n=" + std::to_string(n), r.raw, r.rounded, tol,
          std::abs(r.raw - (n + 1)) < tol);
  }
  s.phase("integrate");
}

void run_index_additivity(Scenario& s) {
  const std::string chart_label = get<std::string>(s.cfg, "chart");
  const MetricSection section = parse_metric(chart_label);
  const GridSpec grid = grid_from(s.cfg["grid"]);
  std::vector<BundleConnection> bundles;
  for (const auto& label : get<std::vector<std::string>>(s.cfg, "bundles"))
    bundles.push_back(parse_bundle(label, section.chart));
  if (bundles.empty()) throw ConfigError("index-additivity needs at least one bundle");
  const double tol = get<double>(s.cfg, "tolerance");
  const double ch_tol = get<double>(s.cfg, "ch_tolerance");
  const AdditivityReport a = index_additivity_check(bundles, section, section.chart, grid);
  s.phase("index");
  const ChAdditivity ch = ch_additivity_check(bundles, section.chart, grid);
  s.phase("ch");
  s.row("index_direct_sum", a.lhs, a.direct_sum.rounded, tol, a.gap < tol);
  s.row("index_sum_of_parts", a.rhs, std::lround(a.rhs), tol, a.gap < tol);
  s.row("index_gap", a.gap, std::nullopt, tol, a.gap < tol);
  s.row("ch_additivity_defect", ch.worst(), std::nullopt, ch_tol, ch.worst() < ch_tol);
}

void run_multinorm(Scenario& s) {
  MultiMetricFamily family;
  for (const auto& label : get<std::vector<std::string>>(s.cfg, "metrics")) {
    family.members.push_back(parse_metric(label));
    family.index_labels.push_back(label);
  }
  validate_family(family);
  const Coords x = coords_from(s.cfg["point"], "point");
  const Eigen::VectorXd v = coords_from(s.cfg["vector"], "vector");
  const auto endpoints = get<std::vector<std::vector<double>>>(s.cfg, "endpoints");
  if (endpoints.size() != 2) throw ConfigError("endpoints must hold two points");
  const int n = family.members.front().dim();
  if (x.size() != n || v.size() != n || endpoints[0].size() != static_cast<std::size_t>(n) ||
      endpoints[1].size() != static_cast<std::size_t>(n))
    throw ConfigError("point, vector and endpoints must match the chart dimension");
  const int samples = get<int>(s.cfg, "samples");
  const auto seed = get<std::uint64_t>(s.cfg, "seed");
  const double tol = get<double>(s.cfg, "tolerance");
  const DistanceConfig solver = solver_from(s.cfg["solver"]);

  const Eigen::VectorXd norms = multi_norm(family, x, v);
  for (std::size_t i = 0; i < family.size(); ++i)
    s.row("norm:" + family.index_labels[i], norms[static_cast<Eigen::Index>(i)], std::nullopt, 0.0,
          std::isfinite(norms[static_cast<Eigen::Index>(i)]));
  for (std::size_t i = 0; i < family.size(); ++i) {
    const AxiomReport a = norm_axiom_check(section_evaluate(family.members[i], x), samples, seed + i);
    const double relative = a.worst() / std::max(1.0, a.norm_scale);
    s.row("norm_axioms:" + family.index_labels[i], relative, std::nullopt, tol, relative < tol);
  }
  s.phase("norms");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Matrix g0 = section_evaluate(family.members[0], x).form;
  for (std::size_t i = 1; i < family.size(); ++i) {
    const Matrix gi = section_evaluate(family.members[i], x).form;
    const EquivalenceConstants c = norm_equivalence_constants(gi, g0);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      Eigen::VectorXd w(n);
      for (int d = 0; d < n; ++d) w[d] = normal(rng);
      const double ni = form_norm(gi, w), nj = form_norm(g0, w);
      worst = std::max({worst, c.lower * nj - ni, ni - c.upper * nj});
    }
    const std::string pair = family.index_labels[i] + "/" + family.index_labels[0];
    s.row("equivalence_lower:" + pair, c.lower, std::nullopt, tol, worst <= tol);
    s.row("equivalence_upper:" + pair, c.upper, std::nullopt, tol, worst <= tol);
  }
  s.phase("equivalence");

  const Coords p = Eigen::Map<const Eigen::VectorXd>(endpoints[0].data(), n);
  const Coords q = Eigen::Map<const Eigen::VectorXd>(endpoints[1].data(), n);
  const std::vector<DistanceResult> d = multi_distance(family, p, q, solver);
  for (std::size_t i = 0; i < d.size(); ++i)
    s.row("distance:" + family.index_labels[i], d[i].distance, std::nullopt, solver.tolerance,
          d[i].converged);
  s.phase("distances");
}

void run_geodesic_probe(Scenario& s) {
  const std::string label = get<std::string>(s.cfg, "metric");
  const MetricSection section = parse_metric(label);
  const int trials = get<int>(s.cfg, "trials");
  if (trials < 1) throw ConfigError("trials must be positive");
  const auto seed = get<std::uint64_t>(s.cfg, "seed");
  const double tol = get<double>(s.cfg, "tolerance");
  const DistanceConfig solver = solver_from(s.cfg["solver"]);

  std::optional<DistanceOracle> oracle;
  if (starts_with(label, "sphere:")) {
    const double r = parse_params(label.substr(7), label).at("r");
    oracle = [r](const Coords& a, const Coords& b) { return sphere_arc_distance(r, a, b); };
  }
  const ProbeReport probe = hopf_rinow_probe(section, trials, seed, solver, oracle);
  s.phase("probe");
  s.row("converged_trials", probe.converged, probe.converged, 0.0, probe.converged == trials);
  s.row("symmetry_worst", probe.worst_symmetry, std::nullopt, tol, probe.worst_symmetry < tol);
  s.row("triangle_worst", probe.worst_triangle, std::nullopt, tol, probe.worst_triangle < tol);
  if (probe.worst_oracle_relative)
    s.row("oracle_relative_worst", *probe.worst_oracle_relative, std::nullopt, tol,
          *probe.worst_oracle_relative < tol);

  // Long-time extension from the chart centre, 45 degrees off the axes.
  const Chart& chart = section.chart;
  Coords start(chart.dim());
  for (int i = 0; i < chart.dim(); ++i)
    start[i] = chart.domain[i].periodic ? chart.domain[i].lower + 0.25
                                        : 0.5 * (chart.domain[i].lower + chart.domain[i].upper);
  const Eigen::LLT<Matrix> chol(section.sampler(start));
  const Eigen::VectorXd frame = Eigen::VectorXd::Ones(chart.dim()).normalized();
  const Eigen::VectorXd velocity =
      Matrix(chol.matrixL()).transpose().triangularView<Eigen::Upper>().solve(frame);
  const ChristoffelField gamma = levi_civita(section);
  const double duration = get<double>(s.cfg, "drift_duration");
  const GeodesicPath path = integrate_geodesic(gamma, {start, velocity}, duration, solver.dt);
  const double drift_tol = get<double>(s.cfg, "drift_tolerance");
  s.row("speed_drift", path.max_speed_drift(), std::nullopt, drift_tol,
        path.max_speed_drift() < drift_tol);
  s.phase("drift");

  // Error ratio on halving dt, against a dt/16 reference over one revolution.
  const double horizon = 2.0 * kPi;
  const double coarse = horizon / 64.0;
  const auto endpoint = [&](double dt) {
    return integrate_geodesic(gamma, {start, velocity}, horizon, dt).back().position;
  };
  const Coords reference = endpoint(coarse / 16.0);
  const double e1 = chart.displacement(reference, endpoint(coarse)).norm();
  const double e2 = chart.displacement(reference, endpoint(coarse / 2.0)).norm();
  const double ratio = e2 > 0.0 ? e1 / e2 : std::numeric_limits<double>::infinity();
  const double min_ratio = get<double>(s.cfg, "order_ratio");
  s.row("rk4_order_ratio", ratio, std::nullopt, min_ratio, ratio >= min_ratio);
  s.phase("order");
}

void run_levi_civita(Scenario& s) {
  const int points = get<int>(s.cfg, "points");
  if (points < 1) throw ConfigError("points must be positive");
  const auto seed = get<std::uint64_t>(s.cfg, "seed");
  const double agree_tol = get<double>(s.cfg, "agreement_tolerance");
  const double torsion_tol = get<double>(s.cfg, "torsion_tolerance");
  const double compat_tol = get<double>(s.cfg, "compatibility_tolerance");
  for (const auto& label : get<std::vector<std::string>>(s.cfg, "metrics")) {
    const MetricSection section = parse_metric(label);
    const ChristoffelField standard = levi_civita(section, ChristoffelRoute::kStandard);
    const ChristoffelField koszul = levi_civita(section, ChristoffelRoute::kKoszul);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double agree = 0.0, torsion = 0.0, compat = 0.0;
    for (int k = 0; k < points; ++k) {
      Coords x(section.dim());
      for (int i = 0; i < section.dim(); ++i) {
        const AxisRange& a = section.chart.domain[i];
        x[i] = a.periodic ? a.lower + unit(rng) * a.length()
                          : a.lower + (0.25 + 0.5 * unit(rng)) * a.length();
      }
      const Christoffel cs = standard.evaluate(x);
      const Christoffel ck = koszul.evaluate(x);
      agree = std::max(agree, cs.max_abs_difference(ck));
      torsion = std::max({torsion, cs.torsion_defect(), ck.torsion_defect()});
      compat = std::max({compat, metric_compatibility_defect(section, standard, x),
                         metric_compatibility_defect(section, koszul, x)});
    }
    s.row("koszul_vs_standard:" + label, agree, std::nullopt, agree_tol, agree < agree_tol);
    s.row("torsion:" + label, torsion, std::nullopt, torsion_tol, torsion < torsion_tol);
    s.row("metric_compatibility:" + label, compat, std::nullopt, compat_tol, compat < compat_tol);
  }
  s.phase("certify");
}

}  // namespace

ojson resolve_config(const json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (!config.contains("scenario") || !config["scenario"].is_string())
    throw ConfigError("config needs a 'scenario' string");
  const std::string scenario = config["scenario"].get<std::string>();
  if (!find_scenario(scenario)) throw ConfigError("unknown scenario '" + scenario + "'");
  ojson effective = ojson::parse(config.dump());
  try {
    merge_defaults(effective, scenario_defaults(scenario, effective));
  } catch (const GeometryError& e) {
    throw ConfigError(e.what());
  }
  return effective;
}

RunReport run_scenario(const json& config) {
  const ojson cfg = resolve_config(config);
  RunReport report;
  report.scenario = cfg["scenario"].get<std::string>();
  report.inputs = cfg;
  Scenario s{cfg, report};
  try {
    if (report.scenario == "gauss-bonnet") run_gauss_bonnet(s);
    else if (report.scenario == "chern-degree") run_chern_degree(s);
    else if (report.scenario == "riemann-roch-scan") run_riemann_roch(s);
    else if (report.scenario == "index-additivity") run_index_additivity(s);
    else if (report.scenario == "multinorm-report") run_multinorm(s);
    else if (report.scenario == "geodesic-probe") run_geodesic_probe(s);
    else if (report.scenario == "levi-civita-cert") run_levi_civita(s);
  } catch (const GeometryError& e) {
    // Descriptor-level failures are configuration problems; the rest propagate.
    if (e.kind() == ErrorKind::kUnknownDescriptor || e.kind() == ErrorKind::kChartMismatch ||
        e.kind() == ErrorKind::kDimensionMismatch || e.kind() == ErrorKind::kPointOutsideDomain ||
        e.kind() == ErrorKind::kDegenerateGrid)
      throw ConfigError(e.what());
    throw;
  }
  return report;
}

ojson report_to_json(const RunReport& report) {
  ojson out;
  out["scenario"] = report.scenario;
  out["inputs"] = report.inputs;
  out["results"] = ojson::array();
  for (const auto& r : report.results) {
    ojson row;
    row["name"] = r.name;
    row["raw"] = r.raw;
    row["rounded"] = r.rounded ? ojson(*r.rounded) : ojson(nullptr);
    row["tolerance"] = r.tolerance;
    row["pass"] = r.pass;
    out["results"].push_back(std::move(row));
  }
  out["timings"] = report.timings;
  out["version"] = report.version;
  out["pass"] = report.pass();
  return out;
}

std::string report_to_csv(const RunReport& report) {
  std::ostringstream os;
  os << "name,raw,rounded,tolerance,pass\n";
  char buf[64];
  for (const auto& r : report.results) {
    const bool quote = r.name.find(',') != std::string::npos;
    os << (quote ? "\"" : "") << r.name << (quote ? "\"" : "") << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.raw);
    os << buf << ',';
    if (r.rounded) os << *r.rounded;
    std::snprintf(buf, sizeof buf, "%.17g", r.tolerance);
    os << ',' << buf << ',' << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string render_report(const RunReport& report, ReportFormat format) {
  if (format == ReportFormat::kCsv) return report_to_csv(report);
  return report_to_json(report).dump(2) + "\n";
}

void emit_report(const RunReport& report, const std::string& path, ReportFormat format) {
  namespace fs = std::filesystem;
  const std::string body = render_report(report, format);
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot open " + tmp.string());
    out << body;
    out.flush();
    if (!out) throw OutputError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError("cannot move report into " + target.string());
  }
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &config;
  const auto path = split(key, '.');
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->contains(path[i]) || !(*node)[path[i]].is_object()) (*node)[path[i]] = json::object();
    node = &(*node)[path[i]];
  }
  (*node)[path.back()] = std::move(value);
}

}  // namespace mbgeom
