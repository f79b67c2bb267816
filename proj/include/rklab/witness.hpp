#pragma once

// Witness functions f = 1 - B - iq sum sqrt(y_n) c_n / (z - conj z_n),
// orthogonal to 1 - B, and the tempered phase-derivative check.

#include <cmath>
#include <string>
#include <vector>

#include "rklab/model_space.hpp"
#include "rklab/space.hpp"

namespace rklab {

struct ConditionCheck {
  std::string name;
  double value = 0;
  double bound = 0;
  bool pass = false;
};

template <class Real>
struct WitnessFunction {
  InnerFunctionSpec<Real> B;
  Real q = 0;
  std::vector<Complex<Real>> centers;   // z_n
  std::vector<Real> weights;            // sqrt(y_n) c_n (Case 1: single weight 1)

  Complex<Real> operator()(Complex<Real> z) const {
    CompensatedSum<Complex<Real>> s;
    for (std::size_t k = 0; k < centers.size(); ++k) s.add(weights[k] / (z - std::conj(centers[k])));
    return one_minus_blaschke(B, z) - Complex<Real>(0, q) * s.value();
  }
};

template <class Real>
struct WitnessReport {
  int which = 1;
  std::vector<Real> ys;
  std::vector<Real> y_times_f;          // y |f(iy)|
  // Case 1 grid bound: |f(t)| >= C / max(t^2, 1) with C recorded
  Real grid_C = 0;
  Real grid_C_at = 0;
  Real analytic_C = 0;                  // same bound for |(t - x0 + i(y0 - q)) / (t - x0 + i y0)| - 1
  bool triangle_bound_holds = false;    // |f(t)| >= that expression - 1e-12 on the grid
  // Case 2
  std::size_t n0 = 0;                   // first schedule position from which c) holds
  Real diff_M = 0;                      // sampled sup y^2 |1 - B(iy) - q/y|
  std::vector<Real> re_f_at_zeros;      // |Re f(z_n)|, n >= n0
  std::vector<Real> predicted;          // q c_n / (2 sqrt(y_n))
  std::vector<ConditionCheck> conditions;
};

struct WitnessOptions {
  std::vector<double> ys{1e2, 1e3, 1e4, 1e5};
  // Case 1
  std::size_t z0 = static_cast<std::size_t>(-1);   // default: zero with smallest y
  double grid_half_width = 1e3;
  std::size_t grid_points = 20001;
  double exclusion = 1e-3;                          // around x0
  // Case 2
  std::vector<std::size_t> subsequence;             // default: all listed zeros
  std::vector<double> coefficients;                 // c_n; default 1
  double coefficient_tail = 0;                      // bound on the unlisted part of sum sqrt(y_n) c_n
};

namespace detail {

[[noreturn]] inline void violated(const ConditionCheck& c) {
  fail(ErrorCode::ConditionViolated, c.name + " fails (" + std::to_string(c.value) + " vs " + std::to_string(c.bound) + ")");
}

template <class Real>
void y_table(const WitnessFunction<Real>& f, const WitnessOptions& o, WitnessReport<Real>& r) {
  for (double yd : o.ys) {
    const Real y = static_cast<Real>(yd);
    r.ys.push_back(y);
    r.y_times_f.push_back(y * std::abs(f(Complex<Real>(0, y))));
  }
}

}  // namespace detail

template <class Real>
std::pair<WitnessFunction<Real>, WitnessReport<Real>> build_witness_case1(const InnerFunctionSpec<Real>& B,
                                                                           const WitnessOptions& o = {}) {
  const auto angular = angular_q(B, std::vector<Real>{});
  std::size_t k0 = o.z0;
  if (k0 == static_cast<std::size_t>(-1)) {
    k0 = 0;
    for (std::size_t k = 1; k < B.size(); ++k)
      if (B.zeros[k].imag() < B.zeros[k0].imag()) k0 = k;
  }
  if (k0 >= B.size()) fail(ErrorCode::DomainError, "designated zero out of range");
  const Complex<Real> z0 = B.zeros[k0];
  const Real q = angular.q;
  WitnessReport<Real> r;
  r.which = 1;
  ConditionCheck c{"q > 2 y0", static_cast<double>(q), static_cast<double>(2 * z0.imag()), q > 2 * z0.imag()};
  r.conditions.push_back(c);
  if (!c.pass) detail::violated(c);
  WitnessFunction<Real> f{B, q, {z0}, {Real(1)}};
  detail::y_table(f, o, r);

  r.grid_C = infinity<Real>();
  r.analytic_C = infinity<Real>();
  r.triangle_bound_holds = true;
  const Real W = static_cast<Real>(o.grid_half_width);
  for (std::size_t i = 0; i < o.grid_points; ++i) {
    const Real t = -W + 2 * W * Real(i) / Real(o.grid_points - 1);
    if (std::abs(t - z0.real()) < static_cast<Real>(o.exclusion)) continue;
    const Real w = std::max(t * t, Real(1));
    const Real ft = std::abs(f(Complex<Real>(t)));
    const Complex<Real> s(t - z0.real(), z0.imag());
    const Real lower = std::abs((s - Complex<Real>(0, q)) / s) - 1;
    if (ft < lower - Real(1e-12)) r.triangle_bound_holds = false;
    if (w * ft < r.grid_C) {
      r.grid_C = w * ft;
      r.grid_C_at = t;
    }
    r.analytic_C = std::min(r.analytic_C, w * lower);
  }
  r.conditions.push_back({"grid bound C > 0", static_cast<double>(r.grid_C), 0, r.grid_C > 0});
  r.conditions.push_back({"|f| >= |ratio| - 1 on grid", r.triangle_bound_holds ? 1.0 : 0.0, 1, r.triangle_bound_holds});
  return {f, r};
}

template <class Real>
std::pair<WitnessFunction<Real>, WitnessReport<Real>> build_witness_case2(const InnerFunctionSpec<Real>& B,
                                                                           const WitnessOptions& o = {}) {
  const auto angular = angular_q(B, std::vector<Real>{});
  const Real q = angular.q;
  std::vector<std::size_t> sub = o.subsequence;
  if (sub.empty())
    for (std::size_t k = 0; k < B.size(); ++k) sub.push_back(k);
  std::vector<Real> c(sub.size(), Real(1));
  if (!o.coefficients.empty()) {
    if (o.coefficients.size() != sub.size()) fail(ErrorCode::DomainError, "coefficients not co-indexed with the subsequence");
    for (std::size_t i = 0; i < sub.size(); ++i) c[i] = static_cast<Real>(o.coefficients[i]);
  }
  for (Real ci : c)
    if (!(ci > 0)) fail(ErrorCode::DomainError, "coefficients must be positive");

  WitnessReport<Real> r;
  r.which = 2;
  auto check = [&](ConditionCheck ch) {
    r.conditions.push_back(ch);
    if (!ch.pass) detail::violated(ch);
  };
  std::vector<Real> partial;
  CompensatedSum<Real> a, b;
  const auto hs = doubling_horizons(sub.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    const Complex<Real> z = B.zeros[sub[i]];
    a.add(c[i] * c[i] * z.real() * z.real());
    b.add(std::sqrt(z.imag()) * c[i]);
    if (next < hs.size() && i + 1 == hs[next]) {
      partial.push_back(a.value());
      ++next;
    }
  }
  const Growth ga = classify_partial_sums<Real>(partial);
  check({"a) sum c_n^2 x_n^2 diverges", static_cast<double>(a.value()), 0, ga == Growth::diverging});
  const Real tol = Real(1e-12) + static_cast<Real>(o.coefficient_tail);
  check({"b) sum sqrt(y_n) c_n = 1", static_cast<double>(b.value()), 1, std::abs(b.value() - 1) <= tol});

  r.n0 = sub.size();
  for (std::size_t i = sub.size(); i-- > 0;) {
    if (q * c[i] > 4 * std::sqrt(B.zeros[sub[i]].imag()))
      r.n0 = i;
    else
      break;
  }
  check({"c) q c_n > 4 sqrt(y_n) from some n0", static_cast<double>(r.n0), static_cast<double>(sub.size()),
         r.n0 < sub.size()});
  bool small = true, gaps = true;
  for (std::size_t i = r.n0; i < sub.size(); ++i) {
    const Complex<Real> zi = B.zeros[sub[i]];
    if (!(zi.imag() < 1)) small = false;
    for (std::size_t j = r.n0; j < sub.size(); ++j)
      if (j != i && !(std::abs(zi.real() - B.zeros[sub[j]].real()) > zi.real() / 2)) gaps = false;
  }
  check({"y_n < 1", small ? 1.0 : 0.0, 1, small});
  check({"|x_n - x_k| > x_n / 2", gaps ? 1.0 : 0.0, 1, gaps});

  WitnessFunction<Real> f{B, q, {}, {}};
  for (std::size_t i = 0; i < sub.size(); ++i) {
    f.centers.push_back(B.zeros[sub[i]]);
    f.weights.push_back(std::sqrt(B.zeros[sub[i]].imag()) * c[i]);
  }
  detail::y_table(f, o, r);
  for (double yd : o.ys) {
    const Real y = static_cast<Real>(yd);
    r.diff_M = std::max(r.diff_M, y * y * std::abs(one_minus_blaschke(B, Complex<Real>(0, y)) - q / y));
  }
  for (std::size_t i = r.n0; i < sub.size(); ++i) {
    const Complex<Real> z = B.zeros[sub[i]];
    r.re_f_at_zeros.push_back(std::abs(f(z).real()));
    r.predicted.push_back(q * c[i] / (2 * std::sqrt(z.imag())));
  }
  return {f, r};
}

// ---------------------------------------------------------------------------
// Tempered inner functions: Theta = exp(2 i phi) on R.

/// phi'(t) = (1/2) d/dt arg Theta(t).
template <class Real>
Real half_phase_derivative(const InnerFunctionSpec<Real>& B, Real t) {
  return boundary_phase_derivative(B, t) / 2;
}

template <class Real>
struct TemperedReport {
  bool pass = false;
  Real worst_ratio = 0;            // max phi'(t_n) / (C (|t_n| + 1)^N)
  std::size_t worst = 0;
  NodeWeightSystem<Real> induced;  // b_n = 1 / (pi phi'(t_n))
};

template <class Real>
TemperedReport<Real> tempered_check(const std::vector<Real>& nodes, const std::vector<Real>& phase_derivatives, Real N,
                                    Real C) {
  if (nodes.size() != phase_derivatives.size()) fail(ErrorCode::DomainError, "derivatives not co-indexed with nodes");
  const Real pi = std::numbers::pi_v<Real>;
  TemperedReport<Real> r;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Real d = phase_derivatives[k];
    if (!(d > 0)) fail(ErrorCode::DomainError, "phase derivatives must be positive");
    const Real ratio = d / (C * std::pow(std::abs(nodes[k]) + 1, N));
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst = k;
    }
    r.induced.indices.push_back(static_cast<long>(k));
    r.induced.nodes.emplace_back(nodes[k], Real(0));
    r.induced.weights.push_back(1 / (pi * d));
  }
  r.pass = r.worst_ratio <= 1 + Real(1e-12);
  r.induced.validate();
  return r;
}

}  // namespace rklab
