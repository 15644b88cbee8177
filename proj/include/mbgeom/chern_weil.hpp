#pragma once

#include "mbgeom/connection.hpp"

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace mbgeom {

// Characteristic forms on a surface. Only degrees 0 and 2 survive, so an
// even form is a pair (scalar, coefficient of du ^ dv).
//
// Sign conventions: c_1 is represented by (i / 2 pi) tr F, which equals the
// ch_1 = -(1 / 2 pi i) tr F representative; Td(TM) = 1 + c_1(TM) / 2 with
// c_1(TM) <-> (K / 2 pi) dA. With these, deg O(n) = n.

struct EvenFormValue {
  std::complex<double> degree0{0.0, 0.0};
  std::complex<double> degree2{0.0, 0.0};

  EvenFormValue& operator+=(const EvenFormValue& o) {
    degree0 += o.degree0;
    degree2 += o.degree2;
    return *this;
  }
};

inline EvenFormValue operator+(EvenFormValue a, const EvenFormValue& b) { return a += b; }

/// Wedge product truncated at total degree 2.
inline EvenFormValue operator*(const EvenFormValue& a, const EvenFormValue& b) {
  return {a.degree0 * b.degree0, a.degree0 * b.degree2 + a.degree2 * b.degree0};
}

enum class IndexFormula { kDegree, kChTd, kChAhat, kGaussBonnet };

const char* to_string(IndexFormula formula);

struct IndexReport {
  double raw = 0.0;
  long rounded = 0;
  double gap = 0.0;
  IndexFormula formula = IndexFormula::kDegree;
  std::vector<std::string> inputs;
  double imaginary_residue = 0.0;  // |imaginary part| of the integral
};

struct FormIntegral {
  double real = 0.0;
  double imag = 0.0;
};

using EvenFormSampler = std::function<EvenFormValue(const Coords&)>;

EvenFormValue chern_character_point(const Curvature2Form& f);
EvenFormValue todd_point(double gaussian_curvature, double area_element);
EvenFormValue ahat_point(const Coords& x);

/// Quadrature of the degree-2 coefficient over the (margin-shrunk) box.
FormIntegral integrate_even_form(const Chart& chart, const GridSpec& spec,
                                 const EvenFormSampler& sampler);

IndexReport first_chern_number(const BundleConnection& conn, const Chart& chart,
                               const GridSpec& spec);
IndexReport gauss_bonnet(const MetricSection& section, const GridSpec& spec);
IndexReport index_ch_td(const BundleConnection& conn, const MetricSection& section,
                        const Chart& chart, const GridSpec& spec);
IndexReport index_ch_ahat(const BundleConnection& conn, const Chart& chart, const GridSpec& spec);

BundleConnection whitney_sum(const BundleConnection& a, const BundleConnection& b);
BundleConnection whitney_sum(const std::vector<BundleConnection>& bundles);

/// Largest off-block-diagonal entry of the sum's curvature at x.
double whitney_block_defect(const BundleConnection& a, const BundleConnection& b, const Coords& x);

struct ChAdditivity {
  double degree0 = 0.0;
  double degree2 = 0.0;

  double worst() const { return std::max(degree0, degree2); }
};

ChAdditivity ch_additivity_check(const std::vector<BundleConnection>& bundles, const Chart& chart,
                                 const GridSpec& spec);

struct AdditivityReport {
  IndexReport direct_sum;
  std::vector<IndexReport> parts;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

AdditivityReport index_additivity_check(const std::vector<BundleConnection>& bundles,
                                        const MetricSection& section, const Chart& chart,
                                        const GridSpec& spec);

// ---------------------------------------------------------------------------
// K^0 of a closed oriented surface, realized on (rank, degree) pairs.

inline constexpr double kClassGapLimit = 0.01;

struct BundleClass {
  long rank = 0;
  long degree = 0;
  double raw_degree = 0.0;

  friend bool operator==(const BundleClass& a, const BundleClass& b) {
    return a.rank == b.rank && a.degree == b.degree;
  }
};

struct ReducedPair {
  long rank = 0;
  long degree = 0;

  friend bool operator==(const ReducedPair&, const ReducedPair&) = default;
};

class K0Element {
 public:
  K0Element() = default;
  K0Element(std::vector<BundleClass> plus, std::vector<BundleClass> minus);
  static K0Element of(const BundleClass& c) { return K0Element({c}, {}); }

  const std::vector<BundleClass>& plus() const { return plus_; }
  const std::vector<BundleClass>& minus() const { return minus_; }
  const ReducedPair& reduced() const { return reduced_; }

 private:
  std::vector<BundleClass> plus_;
  std::vector<BundleClass> minus_;
  ReducedPair reduced_;
};

enum class K0Op { kAdd, kSubtract };

BundleClass k0_class(const BundleConnection& conn, const Chart& chart, const GridSpec& spec);
K0Element k0_combine(const K0Element& a, const K0Element& b, K0Op op);

}  // namespace mbgeom
