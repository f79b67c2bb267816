#pragma once

// Upper half-plane Blaschke products, Clark measures and K_Theta kernels.
// Inner products of rational functions are exact via partial fractions:
// for poles p, q in the lower half-plane,
//   <1/(z - p), 1/(z - q)>_{H^2} = 2 pi i / (conj(q) - p).

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "rklab/numerics.hpp"

namespace rklab {

enum class ConvergenceFactor { none, at_i };

template <class Real>
struct InnerFunctionSpec {
  std::vector<Complex<Real>> zeros;       // z_n = x_n + i y_n, y_n > 0
  std::vector<int> multiplicities;        // empty: all simple
  Real exp_factor = 0;                    // a >= 0 in exp(i a z)
  ConvergenceFactor factor = ConvergenceFactor::none;
  bool infinite = false;                  // listed zeros are a truncation
  Real omitted_height = 0;                // bound on sum of y_n over unlisted zeros
  Majorant<Real> height_majorant{};       // y_n <= term(position)

  std::size_t size() const { return zeros.size(); }
  int multiplicity(std::size_t k) const { return multiplicities.empty() ? 1 : multiplicities[k]; }

  void validate() const {
    if (!multiplicities.empty() && multiplicities.size() != zeros.size())
      fail(ErrorCode::DomainError, "multiplicities not co-indexed with zeros");
    for (std::size_t k = 0; k < zeros.size(); ++k) {
      if (!(zeros[k].imag() > 0)) fail(ErrorCode::DomainError, "zeros must lie in the upper half-plane");
      if (multiplicity(k) < 1) fail(ErrorCode::DomainError, "multiplicities must be >= 1");
    }
    if (!(exp_factor >= 0)) fail(ErrorCode::DomainError, "exponential factor must be >= 0");
    if (!(omitted_height >= 0)) fail(ErrorCode::DomainError, "omitted height must be >= 0");
  }

  int degree() const {
    if (infinite || exp_factor != 0) fail(ErrorCode::DegreeUnknown, "inner function has infinite degree");
    int d = 0;
    for (std::size_t k = 0; k < zeros.size(); ++k) d += multiplicity(k);
    return d;
  }

  Real height_sum() const {
    CompensatedSum<Real> s;
    for (std::size_t k = 0; k < zeros.size(); ++k) s.add(multiplicity(k) * zeros[k].imag());
    return s.value();
  }
};

template <class Real>
InnerFunctionSpec<Real> finite_blaschke(std::vector<Complex<Real>> zeros) {
  InnerFunctionSpec<Real> s;
  s.zeros = std::move(zeros);
  s.validate();
  return s;
}

namespace detail {

template <class Real>
Complex<Real> blaschke_factor(const InnerFunctionSpec<Real>& B, std::size_t k, Complex<Real> z) {
  const Complex<Real> zn = B.zeros[k];
  Complex<Real> f = (z - zn) / (z - std::conj(zn));
  if (B.factor == ConvergenceFactor::at_i) {
    const Complex<Real> i(0, 1);
    const Complex<Real> at = (i - zn) / (i - std::conj(zn));
    f *= std::abs(at) / at;
  }
  return f;
}

}  // namespace detail

/// Theta(z) over the listed zeros; factors normalized to 1 at infinity
/// unless the at-i convention is selected.
template <class Real>
Complex<Real> blaschke_eval(const InnerFunctionSpec<Real>& B, Complex<Real> z) {
  Complex<Real> v(1);
  for (std::size_t k = 0; k < B.size(); ++k) {
    // factors are bounded by 1 on the upper half-plane; only the exact pole is singular
    if (z - std::conj(B.zeros[k]) == Complex<Real>(0)) fail(ErrorCode::PoleHit, "evaluation at the conjugate of a zero");
    const Complex<Real> f = detail::blaschke_factor(B, k, z);
    for (int m = 0; m < B.multiplicity(k); ++m) v *= f;
  }
  if (B.exp_factor != 0) v *= std::exp(Complex<Real>(0, 1) * B.exp_factor * z);
  return v;
}

/// 1 - Theta(z) without cancellation: with b_n = 1 - e_n, the running
/// difference D = 1 - prod b obeys D <- D + e_n (1 - D).
template <class Real>
Complex<Real> one_minus_blaschke(const InnerFunctionSpec<Real>& B, Complex<Real> z) {
  Complex<Real> D(0);
  for (std::size_t k = 0; k < B.size(); ++k) {
    const Complex<Real> gap = z - std::conj(B.zeros[k]);
    if (gap == Complex<Real>(0)) fail(ErrorCode::PoleHit, "evaluation at the conjugate of a zero");
    const Complex<Real> delta = Complex<Real>(0, 2 * B.zeros[k].imag()) / gap;
    Complex<Real> e = delta;
    if (B.factor == ConvergenceFactor::at_i) {
      const Complex<Real> i(0, 1);
      const Complex<Real> at = (i - B.zeros[k]) / (i - std::conj(B.zeros[k]));
      const Complex<Real> u = std::abs(at) / at;
      e = (Real(1) - u) + u * delta;
    }
    for (int m = 0; m < B.multiplicity(k); ++m) D += e * (Real(1) - D);
  }
  if (B.exp_factor != 0) D += (Real(1) - std::exp(Complex<Real>(0, 1) * B.exp_factor * z)) * (Real(1) - D);
  return D;
}

/// |log B_tail(z)| <= 2 sum_tail y_n / Im z for unlisted zeros; returned as a
/// bound on |B(z) - B_listed(z)|.
template <class Real>
Real blaschke_tail_bound(const InnerFunctionSpec<Real>& B, Complex<Real> z) {
  if (!B.infinite || B.omitted_height == 0) return 0;
  if (!(z.imag() > 0)) return infinity<Real>();
  return std::expm1(2 * B.omitted_height / z.imag());
}

// ---------------------------------------------------------------------------
// Caratheodory points and the angular derivative at infinity.

template <class Real>
struct CaratheodoryReport {
  Real value = 0;                  // sum y_n / |zeta - z_n|^2, or sum y_n at infinity
  Real tail_bound = 0;
  Growth growth = Growth::converging;
  bool is_caratheodory = false;
};

/// zeta = nullopt means infinity.
template <class Real>
CaratheodoryReport<Real> caratheodory_test(const InnerFunctionSpec<Real>& B, std::type_identity_t<std::optional<Real>> zeta) {
  B.validate();
  CaratheodoryReport<Real> r;
  const bool at_inf = !zeta.has_value();
  if (!at_inf && B.infinite && !B.height_majorant.present()) {
    const std::size_t from = B.size() - B.size() / 4;
    for (std::size_t k = from; k < B.size(); ++k)
      if (std::abs(B.zeros[k].real() - *zeta) <= Real(1e-9))
        fail(ErrorCode::ZeroAccumulation, "zeros accumulate at the test point");
  }
  auto term = [&](std::size_t k) {
    const Real y = B.multiplicity(k) * B.zeros[k].imag();
    return at_inf ? y : y / std::norm(Complex<Real>(*zeta) - B.zeros[k]);
  };
  std::vector<Real> partial;
  const auto hs = doubling_horizons(B.size());
  CompensatedSum<Real> acc;
  std::size_t next = 0;
  for (std::size_t k = 0; k < B.size(); ++k) {
    acc.add(term(k));
    if (next < hs.size() && k + 1 == hs[next]) {
      partial.push_back(acc.value());
      ++next;
    }
  }
  r.value = acc.value();
  if (!B.infinite) {
    r.is_caratheodory = true;
    return r;
  }
  if (at_inf && B.height_majorant.summable()) {
    bool dominated = true;
    for (std::size_t k = 0; k < B.size(); ++k)
      if (term(k) > B.height_majorant.term(k) * (1 + Real(1e-12))) dominated = false;
    if (dominated) {
      r.tail_bound = B.height_majorant.tail(B.size());
      r.is_caratheodory = true;
      return r;
    }
  }
  r.growth = classify_partial_sums<Real>(partial);
  r.is_caratheodory = r.growth == Growth::converging;
  if (at_inf && r.is_caratheodory) r.tail_bound = B.omitted_height;
  return r;
}

template <class Real>
struct AngularReport {
  Real q = 0;                          // 2 sum y_n
  Real p = 0;                          // 2 / q
  std::vector<Real> ys;
  std::vector<Real> values;            // y (1 - B(iy)), real part
  std::vector<Real> imag_parts;
  Real limit = 0;                      // value at the largest y
  Real deviation = 0;                  // |limit - q|
  bool monotone = false;               // nondecreasing in y
};

template <class Real>
AngularReport<Real> angular_q(const InnerFunctionSpec<Real>& B, const std::vector<Real>& ys) {
  const auto c = caratheodory_test(B, std::nullopt);
  if (!c.is_caratheodory || B.exp_factor != 0)
    fail(ErrorCode::NotCaratheodoryAtInfinity, "sum of y_n is not certified finite");
  AngularReport<Real> r;
  r.q = 2 * (c.value + (B.infinite ? B.omitted_height : Real(0)));
  r.p = 2 / r.q;
  r.ys = ys;
  for (Real y : ys) {
    const Complex<Real> v = y * one_minus_blaschke(B, Complex<Real>(0, y));
    r.values.push_back(v.real());
    r.imag_parts.push_back(v.imag());
  }
  if (!r.values.empty()) {
    r.limit = r.values.back();
    r.deviation = std::abs(r.limit - r.q);
  }
  r.monotone = std::is_sorted(r.values.begin(), r.values.end());
  return r;
}

// ---------------------------------------------------------------------------
// Frostman shifts.

template <class Real>
struct FrostmanShift {
  InnerFunctionSpec<Real> theta;
  Complex<Real> gamma;
};

template <class Real>
FrostmanShift<Real> frostman_shift(InnerFunctionSpec<Real> theta, Complex<Real> gamma) {
  if (!(std::abs(gamma) < 1)) fail(ErrorCode::DomainError, "Frostman parameter must satisfy |gamma| < 1");
  return {std::move(theta), gamma};
}

template <class Real>
Complex<Real> evaluate(const FrostmanShift<Real>& s, Complex<Real> z) {
  const Complex<Real> t = blaschke_eval(s.theta, z);
  return (t - s.gamma) / (Real(1) - std::conj(s.gamma) * t);
}

template <class Real>
struct LevelPoint {
  Complex<Real> z;
  Real residual = 0;
  int iterations = 0;
};

/// Solves Theta(z) = gamma in the box [x_lo, x_hi] x (0, y_hi]: grid seed,
/// then damped secant steps kept inside the upper half-plane.
template <class Real>
LevelPoint<Real> solve_level(const InnerFunctionSpec<Real>& theta, Complex<Real> gamma, Real x_lo, Real x_hi, Real y_hi,
                             int grid = 64, Real tolerance = Real(1e-14)) {
  auto F = [&](Complex<Real> z) { return blaschke_eval(theta, z) - gamma; };
  Complex<Real> best;
  Real best_v = infinity<Real>();
  for (int i = 0; i <= grid; ++i)
    for (int j = 1; j <= grid; ++j) {
      const Complex<Real> z(x_lo + (x_hi - x_lo) * i / grid, y_hi * j / grid);
      const Real v = std::abs(F(z));
      if (v < best_v) {
        best_v = v;
        best = z;
      }
    }
  LevelPoint<Real> out;
  Complex<Real> z0 = best, z1 = best + Complex<Real>(0, y_hi / (4 * grid));
  Complex<Real> f0 = F(z0), f1 = F(z1);
  for (int it = 0; it < 200 && std::abs(f1) > tolerance; ++it) {
    if (f1 == f0) break;
    Complex<Real> step = f1 * (z1 - z0) / (f1 - f0);
    Complex<Real> z2 = z1 - step;
    Complex<Real> f2;
    int halvings = 0;
    for (;;) {
      if (z2.imag() > 0) {
        f2 = F(z2);
        if (std::abs(f2) < std::abs(f1)) break;
      }
      if (++halvings > 40) break;
      step /= Real(2);
      z2 = z1 - step;
    }
    if (halvings > 40) break;
    z0 = z1;
    f0 = f1;
    z1 = z2;
    f1 = f2;
    out.iterations = it + 1;
  }
  out.z = z1;
  out.residual = std::abs(f1);
  return out;
}

// ---------------------------------------------------------------------------
// Clark measures (finite degree).

template <class Real>
struct ClarkData {
  Complex<Real> alpha;
  std::vector<Real> atoms;
  std::vector<Real> masses;     // 2 pi / |Theta'(t_j)|
  Real p_alpha = 0;             // mass at infinity (2 / q when alpha = 1)
};

/// Continuous argument of Theta on the real line, 0 at -infinity.
template <class Real>
Real boundary_phase(const InnerFunctionSpec<Real>& B, Real t) {
  const Real pi = std::numbers::pi_v<Real>;
  CompensatedSum<Real> s;
  for (std::size_t k = 0; k < B.size(); ++k)
    s.add(2 * B.multiplicity(k) * (pi - std::atan2(B.zeros[k].imag(), t - B.zeros[k].real())));
  return s.value() + B.exp_factor * t;
}

/// d/dt arg Theta(t) = |Theta'(t)|.
template <class Real>
Real boundary_phase_derivative(const InnerFunctionSpec<Real>& B, Real t) {
  CompensatedSum<Real> s;
  for (std::size_t k = 0; k < B.size(); ++k) {
    const Real y = B.zeros[k].imag(), dx = t - B.zeros[k].real();
    s.add(2 * B.multiplicity(k) * y / (dx * dx + y * y));
  }
  return s.value() + B.exp_factor;
}

template <class Real>
ClarkData<Real> clark_measure(const InnerFunctionSpec<Real>& B, Complex<Real> alpha) {
  B.validate();
  const int d = B.degree();
  if (d < 1) fail(ErrorCode::DegreeUnknown, "Clark measure needs degree >= 1");
  if (std::abs(std::abs(alpha) - 1) > Real(1e-12)) fail(ErrorCode::DomainError, "alpha must be unimodular");
  const Real pi = std::numbers::pi_v<Real>;
  Real theta = std::arg(alpha);
  if (theta < 0) theta += 2 * pi;
  const bool at_one = std::abs(alpha - Real(1)) <= Real(1e-14);
  if (at_one) theta = 0;
  ClarkData<Real> c;
  c.alpha = alpha;
  Real reach = 1;
  for (const auto& z : B.zeros) reach = std::max(reach, std::abs(z));
  for (int j = at_one ? 1 : 0; j < d; ++j) {
    const Real target = theta + 2 * pi * j;
    Real lo = -reach, hi = reach;
    while (boundary_phase(B, lo) >= target) lo *= 2;
    while (boundary_phase(B, hi) <= target) hi *= 2;
    for (int it = 0; it < 400; ++it) {
      const Real mid = (lo + hi) / 2;
      if (mid == lo || mid == hi) break;
      (boundary_phase(B, mid) < target ? lo : hi) = mid;
    }
    const Real t = (lo + hi) / 2;
    c.atoms.push_back(t);
    c.masses.push_back(2 * pi / boundary_phase_derivative(B, t));
  }
  if (at_one) {
    CompensatedSum<Real> q;
    for (std::size_t k = 0; k < B.size(); ++k) q.add(2 * B.multiplicity(k) * B.zeros[k].imag());
    c.p_alpha = 2 / q.value();
  }
  return c;
}

/// (1 / 2 pi) (alpha - Theta(z)) sum_j g_j m_j / (t_j - z).
template <class Real>
Complex<Real> clark_transform(const std::vector<Complex<Real>>& g, const ClarkData<Real>& data,
                              const InnerFunctionSpec<Real>& B, Complex<Real> z) {
  if (data.p_alpha > 0) fail(ErrorCode::MassAtInfinity, "Clark measure has mass at infinity");
  if (g.size() != data.atoms.size()) fail(ErrorCode::DomainError, "values not co-indexed with atoms");
  const Real pi = std::numbers::pi_v<Real>;
  CompensatedSum<Complex<Real>> s;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (coincides(z, Complex<Real>(data.atoms[j]))) fail(ErrorCode::PoleHit, "evaluation at a Clark atom");
    s.add(g[j] * data.masses[j] / (data.atoms[j] - z));
  }
  return (data.alpha - blaschke_eval(B, z)) * s.value() / (2 * pi);
}

/// (i / 2 pi) (1 - conj(Theta(lambda)) Theta(z)) / (z - conj(lambda)).
template <class Real>
Complex<Real> ktheta_kernel(const InnerFunctionSpec<Real>& B, Complex<Real> lambda, Complex<Real> z) {
  if (coincides(z, std::conj(lambda))) fail(ErrorCode::PoleHit, "kernel pole at conj(lambda)");
  const Real pi = std::numbers::pi_v<Real>;
  const Complex<Real> i(0, 1);
  return i / (2 * pi) * (Real(1) - std::conj(blaschke_eval(B, lambda)) * blaschke_eval(B, z)) / (z - std::conj(lambda));
}

// ---------------------------------------------------------------------------
// Rational H^2 functions with simple poles in the lower half-plane.

template <class Real>
struct RationalH2 {
  std::vector<Complex<Real>> poles;      // Im < 0
  std::vector<Complex<Real>> residues;

  Complex<Real> operator()(Complex<Real> z) const {
    CompensatedSum<Complex<Real>> s;
    for (std::size_t k = 0; k < poles.size(); ++k) s.add(residues[k] / (z - poles[k]));
    return s.value();
  }
};

template <class Real>
Complex<Real> h2_inner(const RationalH2<Real>& f, const RationalH2<Real>& g) {
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  CompensatedSum<Complex<Real>> s;
  for (std::size_t n = 0; n < f.poles.size(); ++n)
    for (std::size_t m = 0; m < g.poles.size(); ++m)
      s.add(f.residues[n] * std::conj(g.residues[m]) * Complex<Real>(0, two_pi) / (std::conj(g.poles[m]) - f.poles[n]));
  return s.value();
}

template <class Real>
RationalH2<Real> operator+(RationalH2<Real> a, const RationalH2<Real>& b) {
  a.poles.insert(a.poles.end(), b.poles.begin(), b.poles.end());
  a.residues.insert(a.residues.end(), b.residues.begin(), b.residues.end());
  return a;
}

template <class Real>
RationalH2<Real> operator*(Complex<Real> c, RationalH2<Real> a) {
  for (auto& r : a.residues) r *= c;
  return a;
}

/// Residues of Theta at conj(z_n) for a finite product with simple zeros.
template <class Real>
std::vector<Complex<Real>> blaschke_residues(const InnerFunctionSpec<Real>& B) {
  B.validate();
  B.degree();
  for (std::size_t k = 0; k < B.size(); ++k)
    if (B.multiplicity(k) != 1) fail(ErrorCode::DomainError, "partial fractions need simple zeros");
  std::vector<Complex<Real>> out;
  for (std::size_t n = 0; n < B.size(); ++n) {
    const Complex<Real> p = std::conj(B.zeros[n]);
    Complex<Real> r = p - B.zeros[n];
    for (std::size_t m = 0; m < B.size(); ++m)
      if (m != n) r *= (p - B.zeros[m]) / (p - std::conj(B.zeros[m]));
    out.push_back(r);
  }
  return out;
}

/// The transformed indicator of atom j: (1 / 2 pi) m_j (alpha - Theta(z)) / (t_j - z).
template <class Real>
RationalH2<Real> clark_kernel_rational(const InnerFunctionSpec<Real>& B, const ClarkData<Real>& data, std::size_t j) {
  const auto res = blaschke_residues(B);
  const Real pi = std::numbers::pi_v<Real>;
  RationalH2<Real> f;
  for (std::size_t n = 0; n < B.size(); ++n) {
    const Complex<Real> p = std::conj(B.zeros[n]);
    f.poles.push_back(p);
    f.residues.push_back(data.masses[j] / (2 * pi) * (-res[n]) / (data.atoms[j] - p));
  }
  return f;
}

template <class Real>
RationalH2<Real> ktheta_kernel_rational(const InnerFunctionSpec<Real>& B, Complex<Real> lambda) {
  const auto res = blaschke_residues(B);
  const Real pi = std::numbers::pi_v<Real>;
  const Complex<Real> i(0, 1), tl = std::conj(blaschke_eval(B, lambda));
  RationalH2<Real> f;
  for (std::size_t n = 0; n < B.size(); ++n) {
    const Complex<Real> p = std::conj(B.zeros[n]);
    f.poles.push_back(p);
    f.residues.push_back(i / (2 * pi) * (-tl) * res[n] / (p - std::conj(lambda)));
  }
  return f;
}

}  // namespace rklab
