#pragma once

// Defect multipliers S: vectors orthogonal to a biorthogonal system are
// h = (S(t_m) b_m^{1/2})_m with G S / F = sum_m S(t_m) d_m / (z - t_m) and
// sum_m |S(t_m)|^2 b_m < inf.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rklab/generating.hpp"
#include "rklab/numerics.hpp"
#include "rklab/space.hpp"

namespace rklab {

template <class Real>
struct CandidateS;

/// Ascending coefficients c_0 + c_1 z + ...
template <class Real>
struct Polynomial {
  std::vector<Complex<Real>> coefficients{Complex<Real>(1)};
};

/// (S(z) - S(w)) / (z - w) for a non-polynomial S.
template <class Real>
struct QuotientForm {
  std::shared_ptr<const CandidateS<Real>> base;
  Complex<Real> w;
};

template <class Real>
struct CandidateS {
  std::variant<Polynomial<Real>, RealZeroProduct<Real>, QuotientForm<Real>> form;

  static CandidateS constant(Complex<Real> c) { return {Polynomial<Real>{{c}}}; }
  static CandidateS polynomial(std::vector<Complex<Real>> c) {
    if (c.empty()) c.push_back(Complex<Real>(0));
    return {Polynomial<Real>{std::move(c)}};
  }
  static CandidateS product(RealZeroProduct<Real> p) {
    p.validate();
    return {std::move(p)};
  }

  bool is_polynomial() const { return std::holds_alternative<Polynomial<Real>>(form); }
};

constexpr double kTaylorRadius = 1e-6;

template <class Real>
EvalResult<Real> evaluate(const CandidateS<Real>& S, Complex<Real> z,
                          const TruncationPolicy& policy = TruncationPolicy::all());

namespace detail {

template <class Real>
Complex<Real> horner(const std::vector<Complex<Real>>& c, Complex<Real> z) {
  Complex<Real> v(0);
  for (std::size_t k = c.size(); k-- > 0;) v = v * z + c[k];
  return v;
}

/// Taylor coefficients a_1..a_4 of S at w from a 32-point trapezoid Cauchy
/// integral on |z - w| = rho; exponentially accurate for entire S.
template <class Real>
std::array<Complex<Real>, 5> taylor_at(const CandidateS<Real>& S, Complex<Real> w, Real rho, Real& tail,
                                       const TruncationPolicy& policy) {
  constexpr int N = 32;
  const Real two_pi = 2 * std::acos(Real(-1));
  std::array<Complex<Real>, 5> a{};
  tail = 0;
  for (int j = 0; j < N; ++j) {
    const Complex<Real> e = std::polar(Real(1), two_pi * Real(j) / Real(N));
    const auto r = evaluate(S, w + rho * e, policy);
    tail = std::max(tail, r.error_bound());
    Complex<Real> ek(1);
    for (int k = 0; k < 5; ++k) {
      a[k] += r.value / ek;
      ek *= e;
    }
  }
  Real rk = 1;
  for (int k = 0; k < 5; ++k) {
    a[k] /= Real(N) * rk;
    rk *= rho;
  }
  return a;
}

}  // namespace detail

template <class Real>
EvalResult<Real> evaluate(const CandidateS<Real>& S, Complex<Real> z, const TruncationPolicy& policy) {
  using std::abs;
  if (const auto* p = std::get_if<Polynomial<Real>>(&S.form)) {
    EvalResult<Real> r;
    r.value = detail::horner(p->coefficients, z);
    Real scale = 0, zk = 1;
    for (const auto& c : p->coefficients) {
      scale += abs(c) * zk;
      zk *= abs(z);
    }
    r.rounding_bound = 4 * unit_roundoff<Real>() * Real(p->coefficients.size()) * scale;
    r.terms_used = p->coefficients.size();
    return r;
  }
  if (const auto* p = std::get_if<RealZeroProduct<Real>>(&S.form)) return eval_real_zero_product(*p, z, policy);

  const auto& q = std::get<QuotientForm<Real>>(S.form);
  const Complex<Real> h = z - q.w;
  if (abs(h) >= Real(kTaylorRadius)) {
    const auto sz = evaluate(*q.base, z, policy);
    const auto sw = evaluate(*q.base, q.w, policy);
    EvalResult<Real> r;
    r.value = (sz.value - sw.value) / h;
    r.tail_bound = (sz.tail_bound + sw.tail_bound) / abs(h);
    r.rounding_bound = (sz.rounding_bound + sw.rounding_bound + unit_roundoff<Real>() * (abs(sz.value) + abs(sw.value))) / abs(h);
    r.terms_used = std::max(sz.terms_used, sw.terms_used);
    return r;
  }
  // removable singularity: S'(w) + S''(w)/2 h + S'''(w)/6 h^2 + S''''(w)/24 h^3
  const Real rho = Real(0.25);
  Real circle_err = 0;
  const auto a = detail::taylor_at(*q.base, q.w, rho, circle_err, policy);
  EvalResult<Real> r;
  r.value = a[1] + h * (a[2] + h * (a[3] + h * a[4]));
  Real mag = 0;
  for (const auto& c : a) mag = std::max(mag, abs(c) * rho);
  // next Taylor term bounded by the coefficient estimate's circle maximum
  r.tail_bound = circle_err / rho + mag * std::pow(abs(h) / rho, 4) / rho;
  r.rounding_bound = 32 * unit_roundoff<Real>() * mag / rho;
  return r;
}

/// log|S(z)|, computed in log space for products.
template <class Real>
Real log_abs(const CandidateS<Real>& S, Complex<Real> z, const TruncationPolicy& policy = TruncationPolicy::all()) {
  if (const auto* p = std::get_if<RealZeroProduct<Real>>(&S.form)) return log_real_zero_product(*p, z, policy).log_abs;
  return std::log(std::abs(evaluate(S, z, policy).value));
}

template <class Real>
CandidateS<Real> difference_quotient(const CandidateS<Real>& S, Complex<Real> w) {
  if (const auto* p = std::get_if<Polynomial<Real>>(&S.form)) {
    const auto& c = p->coefficients;
    if (c.size() <= 1) return CandidateS<Real>::constant(Complex<Real>(0));
    // synthetic division by (z - w)
    std::vector<Complex<Real>> b(c.size() - 1);
    b.back() = c.back();
    for (std::size_t j = b.size() - 1; j-- > 0;) b[j] = c[j + 1] + w * b[j + 1];
    return CandidateS<Real>::polynomial(std::move(b));
  }
  return {QuotientForm<Real>{std::make_shared<const CandidateS<Real>>(S), w}};
}

// ---------------------------------------------------------------------------
// Membership in the defect space.

template <class Real>
struct IdentitySample {
  Complex<Real> z;
  Complex<Real> lhs;   // (G/F)(z) S(z)
  Complex<Real> rhs;   // sum_m S(t_m) d_m / (z - t_m)
  Real residual = 0;
  Real tail_bound = 0;
};

template <class Real>
struct MembershipReport {
  std::vector<std::size_t> horizons;
  std::vector<Real> norm_partial_sums;   // sum |S(t_m)|^2 b_m
  Real norm2 = 0;
  Real cauchy_tail = 0;                  // last doubling increment
  Growth growth = Growth::undetermined;
  std::vector<IdentitySample<Real>> identity;
  Real max_identity_residual = 0;
  bool pass = false;
};

struct MembershipOptions {
  std::size_t horizon = std::size_t(-1);          // stored positions used for the norm
  std::vector<std::complex<double>> samples{{0, 1}, {1, 2}};
  double relative_tail = 1e-2;
};

/// `exact_ratio` optionally supplies G/F in closed form for the identity's
/// left side; otherwise the stored series is used.
template <class Real>
MembershipReport<Real> s_membership_report(const GeneratingRatio<Real>& g, const CandidateS<Real>& S,
                                           const MembershipOptions& options = {},
                                           const std::function<Complex<Real>(Complex<Real>)>& exact_ratio = {}) {
  g.validate();
  const auto& sys = *g.system;
  const std::size_t K = std::min(options.horizon, sys.size());
  if (K < 1) fail(ErrorCode::DomainError, "horizon must be >= 1");
  MembershipReport<Real> r;
  r.horizons = doubling_horizons(K);

  std::vector<Complex<Real>> s_at(sys.size());
  for (std::size_t k = 0; k < sys.size(); ++k) s_at[k] = evaluate(S, sys.nodes[k]).value;

  CompensatedSum<Real> acc;
  std::size_t next = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const Real l = log_abs(S, sys.nodes[k]);
    if (std::isfinite(static_cast<double>(l))) acc.add(std::exp(2 * l + std::log(sys.weights[k])));
    if (next < r.horizons.size() && k + 1 == r.horizons[next]) {
      r.norm_partial_sums.push_back(acc.value());
      ++next;
    }
  }
  r.norm2 = acc.value();
  const std::size_t m = r.norm_partial_sums.size();
  r.cauchy_tail = m >= 2 ? r.norm_partial_sums[m - 1] - r.norm_partial_sums[m - 2] : Real(0);
  r.growth = classify_partial_sums<Real>(r.norm_partial_sums, static_cast<Real>(options.relative_tail));
  r.pass = r.growth == Growth::converging && std::isfinite(static_cast<double>(r.norm2));

  std::vector<Complex<Real>> weighted(sys.size());
  for (std::size_t k = 0; k < sys.size(); ++k) weighted[k] = s_at[k] * g.residues[k];
  for (const auto& zd : options.samples) {
    const Complex<Real> z(static_cast<Real>(zd.real()), static_cast<Real>(zd.imag()));
    IdentitySample<Real> s{z};
    const auto sz = evaluate(S, z);
    EvalResult<Real> ratio;
    if (exact_ratio)
      ratio.value = exact_ratio(z);
    else
      ratio = ratio_eval(g, z);
    s.lhs = ratio.value * sz.value;
    const auto rhs = sum_simple_fractions<Real>({weighted, sys.nodes, {}, !sys.truncated}, z, TruncationPolicy::all());
    s.rhs = rhs.value;
    s.residual = std::abs(s.lhs - s.rhs);
    s.tail_bound = rhs.tail_bound + ratio.tail_bound * std::abs(sz.value);
    r.max_identity_residual = std::max(r.max_identity_residual, s.residual);
    r.identity.push_back(s);
  }
  return r;
}

template <class Real>
SpaceElement<Real> defect_element(const GeneratingRatio<Real>& g, const CandidateS<Real>& S,
                                  const MembershipOptions& options = {}) {
  const auto rep = s_membership_report(g, S, options);
  if (!rep.pass)
    fail(ErrorCode::MembershipFailed, std::string("norm partial sums ") + to_string(rep.growth) + " at horizon " +
                                          std::to_string(rep.horizons.back()));
  auto h = SpaceElement<Real>::zero(g.system);
  for (std::size_t k = 0; k < g.system->size(); ++k)
    h.coefficients(static_cast<Eigen::Index>(k)) = evaluate(S, g.system->nodes[k]).value * std::sqrt(g.system->weights[k]);
  return h;
}

template <class Real>
struct OrthogonalityReport {
  std::vector<Complex<Real>> pairings;
  Real max_residual = 0;
  Real tail_bound = 0;
};

/// max over zeros of |<G/((z - lambda)F), h>| = |sum_m d_m conj(h_m) / ((t_m - lambda) b_m^{1/2})|.
/// For truncated systems the omitted terms need a bound on |h_m| / b_m^{1/2}
/// (= |S(t_m)| for defect elements) past storage; the quotient majorant then
/// bounds each omitted term by 2 |d_m / t_m| |h_m| / b_m^{1/2}.
template <class Real>
OrthogonalityReport<Real> orthogonality_residual(const SpaceElement<Real>& h, const GeneratingRatio<Real>& g,
                                                 const std::vector<Real>& zero_list,
                                                 Real omitted_multiplier_bound = infinity<Real>()) {
  using std::abs;
  g.validate();
  if (!h.system || !same_system(*h.system, *g.system)) fail(ErrorCode::SystemMismatch, "element and ratio systems differ");
  const auto& sys = *g.system;
  OrthogonalityReport<Real> r;
  for (Real lam : zero_list) {
    CompensatedSum<Complex<Real>> acc;
    for (std::size_t k = 0; k < sys.size(); ++k)
      acc.add(g.residues[k] * std::conj(h.coefficients(static_cast<Eigen::Index>(k))) /
              ((sys.nodes[k] - lam) * std::sqrt(sys.weights[k])));
    r.pairings.push_back(acc.value());
    r.max_residual = std::max(r.max_residual, abs(acc.value()));
    Real tail = 0;
    if (sys.truncated) {
      const bool far = sys.size() > 0 && abs(sys.nodes.back()) >= 2 * abs(lam);
      tail = far && g.quotient_majorant.summable() ? 2 * omitted_multiplier_bound * g.quotient_majorant.tail(sys.size())
                                                   : infinity<Real>();
      if (omitted_multiplier_bound == 0) tail = 0;
    }
    r.tail_bound = std::max(r.tail_bound, tail);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Size profiles and exponential type.

template <class Real>
struct SizeRow {
  Real y = 0;
  Real log_s = 0;
  Real m = 0;
  Real ratio = 0;
};

template <class Real>
struct SizeProfile {
  std::vector<SizeRow<Real>> rows;
  bool achieves = false;
  Real y0 = 0;               // all sampled y >= y0 satisfy the floor
  Real min_ratio = 0;        // over samples y >= y0
  Real ratio_floor = 1;
};

/// Verdict "achieves size M": log|S(iy)| >= ratio_floor * M(y) for every
/// sampled y from the reported y0 on.
template <class Real>
SizeProfile<Real> size_profile(const CandidateS<Real>& S, const std::vector<Real>& y_samples,
                               const std::function<Real(Real)>& M, Real ratio_floor = 1) {
  for (std::size_t i = 0; i < y_samples.size(); ++i)
    if (!(y_samples[i] > 0) || (i > 0 && !(y_samples[i] > y_samples[i - 1])))
      fail(ErrorCode::DomainError, "y samples must be positive and increasing");
  SizeProfile<Real> p;
  p.ratio_floor = ratio_floor;
  for (Real y : y_samples) {
    SizeRow<Real> row{y, log_abs(S, Complex<Real>(0, y)), M(y), 0};
    row.ratio = row.m != 0 ? row.log_s / row.m : infinity<Real>();
    p.rows.push_back(row);
  }
  std::size_t first = p.rows.size();
  while (first > 0 && p.rows[first - 1].log_s >= ratio_floor * p.rows[first - 1].m) --first;
  p.achieves = first < p.rows.size();
  if (p.achieves) {
    p.y0 = p.rows[first].y;
    p.min_ratio = infinity<Real>();
    for (std::size_t i = first; i < p.rows.size(); ++i) p.min_ratio = std::min(p.min_ratio, p.rows[i].ratio);
  }
  return p;
}

template <class Real>
struct TypeEstimate {
  Real slope = 0;
  Real intercept = 0;
  Real y_lo = 0;
  Real y_hi = 0;
  std::size_t samples_used = 0;
};

/// Least-squares slope of log|S(iy)| against y over the top decade of samples.
template <class Real>
TypeEstimate<Real> exp_type_estimate(const CandidateS<Real>& S, const std::vector<Real>& y_samples) {
  if (y_samples.size() < 2) fail(ErrorCode::DomainError, "need at least two samples");
  const Real lo = *std::min_element(y_samples.begin(), y_samples.end());
  const Real hi = *std::max_element(y_samples.begin(), y_samples.end());
  if (!(lo > 0) || !(hi >= 100 * lo)) fail(ErrorCode::DomainError, "y samples must span at least two decades");
  TypeEstimate<Real> e;
  e.y_hi = hi;
  e.y_lo = hi / 10;
  std::vector<Real> xs, ls;
  for (Real y : y_samples)
    if (y >= e.y_lo) {
      xs.push_back(y);
      ls.push_back(log_abs(S, Complex<Real>(0, y)));
    }
  e.samples_used = xs.size();
  if (xs.size() < 2) fail(ErrorCode::DomainError, "fewer than two samples in the top decade");
  Eigen::Matrix<Real, Eigen::Dynamic, 2> A(static_cast<Eigen::Index>(xs.size()), 2);
  VectorR<Real> b(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    A(static_cast<Eigen::Index>(i), 0) = xs[i];
    A(static_cast<Eigen::Index>(i), 1) = 1;
    b(static_cast<Eigen::Index>(i)) = ls[i];
  }
  const Eigen::Matrix<Real, 2, 1> sol = A.colPivHouseholderQr().solve(b);
  e.slope = sol(0);
  e.intercept = sol(1);
  return e;
}

namespace detail {

template <class Real>
struct GaussLegendre {
  std::vector<Real> nodes, weights;  // on [-1, 1]
};

template <class Real>
GaussLegendre<Real> gauss_legendre(int n) {
  GaussLegendre<Real> g;
  const Real pi = std::acos(Real(-1));
  for (int i = 1; i <= n; ++i) {
    Real x = std::cos(pi * (Real(i) - Real(0.25)) / (Real(n) + Real(0.5)));
    Real dp = 0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 4 * std::numeric_limits<Real>::epsilon()) break;
    }
    g.nodes.push_back(x);
    g.weights.push_back(2 / ((1 - x * x) * dp * dp));
  }
  return g;
}

}  // namespace detail

/// 2 y^2 int_0^inf mu(t) dt / (t (y^2 + t^2)) for the counting function of
/// the sorted positive `jumps`, by Gauss-Legendre in u = log t on each
/// interval where mu is constant.
template <class Real>
Real size_integral(const std::vector<Real>& jumps, Real y) {
  static const auto gl = detail::gauss_legendre<Real>(16);
  auto integrate = [&](Real u0, Real u1, Real mu) {
    // integrand in u: mu * 2 y^2 / (y^2 + e^{2u})
    const int panels = std::max(1, static_cast<int>(std::ceil((u1 - u0) / Real(0.5))));
    const Real w = (u1 - u0) / panels;
    Real s = 0;
    for (int p = 0; p < panels; ++p) {
      const Real a = u0 + p * w;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const Real u = a + w * (gl.nodes[i] + 1) / 2;
        s += gl.weights[i] * w / 2 * mu * 2 * y * y / (y * y + std::exp(2 * u));
      }
    }
    return s;
  };
  CompensatedSum<Real> total;
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const Real u0 = std::log(jumps[j]);
    const Real u1 = j + 1 < jumps.size() ? std::log(jumps[j + 1]) : std::max(u0, std::log(y)) + 30;
    total.add(integrate(u0, u1, Real(j + 1)));
  }
  return total.value();
}

}  // namespace rklab
