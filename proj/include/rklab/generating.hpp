#pragma once

// Generating functions in ratio form G/F = sum_n d_n / (z - t_n).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rklab/numerics.hpp"
#include "rklab/space.hpp"

namespace rklab {

template <class Real>
struct GeneratingRatio {
  SystemPtr<Real> system;
  std::vector<Complex<Real>> residues;     // d_n, co-indexed with system->nodes
  Majorant<Real> quotient_majorant{};      // bounds |d_k / t_k| by position
  Majorant<Real> residue_majorant{};       // bounds |d_k| by position (optional)

  void validate() const {
    if (!system) fail(ErrorCode::DomainError, "ratio without a system");
    if (residues.size() != system->size()) fail(ErrorCode::DomainError, "residues not co-indexed with nodes");
  }

  SimpleFractionSeries<Real> series() const {
    return {residues, system->nodes, quotient_majorant, !system->truncated};
  }
};

template <class Real>
EvalResult<Real> ratio_eval(const GeneratingRatio<Real>& g, Complex<Real> z,
                            const TruncationPolicy& policy = TruncationPolicy::all()) {
  g.validate();
  return sum_simple_fractions<Real>(g.series(), z, policy);
}

/// Real zeros in [lo, hi) for positive residues on real nodes.
template <class Real>
std::vector<Real> zeros(const GeneratingRatio<Real>& g, Real lo, Real hi, const ZeroSearchOptions& options = {}) {
  g.validate();
  if (!g.system->real_nodes) fail(ErrorCode::DomainError, "interlaced zero search needs real nodes");
  const auto order = g.system->order_by_node();
  std::vector<Real> d, t;
  d.reserve(order.size());
  t.reserve(order.size());
  for (std::size_t k : order) {
    const auto& r = g.residues[k];
    if (r.imag() != 0 || !(r.real() > 0))
      fail(ErrorCode::NonPositiveResidue, "residue at index " + std::to_string(g.system->indices[k]) +
                                              " is not strictly positive");
    d.push_back(r.real());
    t.push_back(g.system->nodes[k].real());
  }
  return bracketed_real_zeros<Real>(d, t, lo, hi, options);
}

template <class Real>
struct BiorthogonalElement {
  SpaceElement<Real> element;   // coefficients d_n / ((t_n - lambda) b_n^{1/2})
  Complex<Real> normalizer;     // (G/F)'(lambda) = -sum d_n / (lambda - t_n)^2
  Complex<Real> lambda;
  Real residual = 0;            // |G/F(lambda)| at verification
  Real scale = 0;               // sum |d_n| / dist(lambda, T)
};

template <class Real>
BiorthogonalElement<Real> biorthogonal_coeffs(const GeneratingRatio<Real>& g, Complex<Real> lambda,
                                              Real relative_tolerance = Real(1e-10)) {
  using std::abs;
  g.validate();
  const auto& sys = *g.system;
  Real dist = infinity<Real>();
  Real mass = 0;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    dist = std::min(dist, abs(lambda - sys.nodes[k]));
    mass += abs(g.residues[k]);
  }
  BiorthogonalElement<Real> out{SpaceElement<Real>::zero(g.system), Complex<Real>(0), lambda};
  out.scale = mass / dist;
  out.residual = abs(ratio_eval(g, lambda).value);
  if (!(out.residual <= relative_tolerance * out.scale))
    fail(ErrorCode::NotAZero, "|G/F(lambda)| = " + std::to_string(static_cast<double>(out.residual)) +
                                  " above tolerance " + std::to_string(static_cast<double>(relative_tolerance * out.scale)));
  CompensatedSum<Complex<Real>> deriv;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const Complex<Real> gap = sys.nodes[k] - lambda;
    out.element.coefficients(static_cast<Eigen::Index>(k)) = g.residues[k] / (gap * std::sqrt(sys.weights[k]));
    deriv.add(-g.residues[k] / (gap * gap));
  }
  out.normalizer = deriv.value();
  if (abs(out.normalizer) < Real(1e-14))
    fail(ErrorCode::NormalizerVanishes, "derivative at the zero vanishes (multiple zero)");
  return out;
}

/// Ratio re-evaluation of the normalized element built at `source` against
/// the zero `target`: sum d_n / ((t_n - lambda_j)(lambda_i - t_n)) / N_j.
/// At target == source this is the limit value, identically computed.
template <class Real>
Complex<Real> kronecker_value(const GeneratingRatio<Real>& g, const BiorthogonalElement<Real>& source,
                              Complex<Real> target) {
  const auto& sys = *g.system;
  CompensatedSum<Complex<Real>> acc;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const Complex<Real> t = sys.nodes[k];
    acc.add(g.residues[k] / ((t - source.lambda) * (target - t)));
  }
  return acc.value() / source.normalizer;
}

template <class Real>
struct KroneckerReport {
  Real max_off_diagonal = 0;
  Real max_diagonal_error = 0;
  std::size_t count = 0;
};

template <class Real>
KroneckerReport<Real> kronecker_residuals(const GeneratingRatio<Real>& g, const std::vector<Real>& zero_list) {
  using std::abs;
  std::vector<BiorthogonalElement<Real>> elems;
  for (Real lam : zero_list) elems.push_back(biorthogonal_coeffs(g, Complex<Real>(lam)));
  KroneckerReport<Real> r;
  r.count = elems.size();
  for (std::size_t j = 0; j < elems.size(); ++j)
    for (std::size_t i = 0; i < elems.size(); ++i) {
      const Complex<Real> v = kronecker_value(g, elems[j], Complex<Real>(zero_list[i]));
      if (i == j)
        r.max_diagonal_error = std::max(r.max_diagonal_error, abs(v - Real(1)));
      else
        r.max_off_diagonal = std::max(r.max_off_diagonal, abs(v));
    }
  return r;
}

// ---------------------------------------------------------------------------
// Exactness diagnostic: partial sums of sum |d_n t_n^k|^2 / b_n.

template <class Real>
struct DegreeGrowth {
  int degree = 0;
  std::vector<std::size_t> horizons;   // in stored positions
  std::vector<Real> partial_sums;
  Growth growth = Growth::undetermined;
};

template <class Real>
std::vector<DegreeGrowth<Real>> exactness_diagnostic(const GeneratingRatio<Real>& g, int max_degree,
                                                     std::size_t horizon) {
  g.validate();
  if (max_degree < 0) fail(ErrorCode::DomainError, "max_degree must be >= 0");
  if (horizon < 1) fail(ErrorCode::DomainError, "horizon must be >= 1");
  const auto& sys = *g.system;
  const std::size_t K = std::min(horizon, sys.size());
  const auto hs = doubling_horizons(K);
  std::vector<DegreeGrowth<Real>> out;
  for (int deg = 0; deg <= max_degree; ++deg) {
    DegreeGrowth<Real> row;
    row.degree = deg;
    row.horizons = hs;
    CompensatedSum<Real> acc;
    std::size_t next = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const Real tk = std::pow(std::abs(sys.nodes[k]), deg);
      acc.add(std::norm(g.residues[k]) * tk * tk / sys.weights[k]);
      if (next < hs.size() && k + 1 == hs[next]) {
        row.partial_sums.push_back(acc.value());
        ++next;
      }
    }
    row.growth = classify_partial_sums<Real>(row.partial_sums);
    out.push_back(std::move(row));
  }
  return out;
}

/// min over |z| = r of |z| |G/F(z)| for each radius (sampled): a bounded-below
/// profile is consistent with |G/F| >~ 1/|z| off the nodes. Radii must avoid
/// the node moduli. Thresholds for interpreting the profile are the caller's.
template <class Real>
std::vector<Real> circle_lower_bounds(const GeneratingRatio<Real>& g, const std::vector<Real>& radii, int samples = 256) {
  std::vector<Real> out;
  const Real two_pi = 2 * std::acos(Real(-1));
  for (Real r : radii) {
    Real lowest = infinity<Real>();
    for (int s = 0; s < samples; ++s) {
      const Complex<Real> z = std::polar(r, two_pi * (Real(s) + Real(0.5)) / Real(samples));
      lowest = std::min(lowest, r * std::abs(ratio_eval(g, z).value));
    }
    out.push_back(lowest);
  }
  return out;
}

}  // namespace rklab
