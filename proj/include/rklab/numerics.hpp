#pragma once

// Error-bounded evaluation of simple-fraction sums sum d_n/(z - t_n), even
// real-zero products prod (1 - z^2/tau_k^2), and bracketed real zeros of
// interlaced positive-residue sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rklab/error.hpp"
#include "rklab/majorant.hpp"

namespace rklab {

template <class Real>
using Complex = std::complex<Real>;
template <class Real>
using VectorC = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;
template <class Real>
using VectorR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <class Real>
using MatrixC = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using MatrixR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <class Real>
constexpr Real infinity() {
  return std::numeric_limits<Real>::infinity();
}
template <class Real>
constexpr Real unit_roundoff() {
  return std::numeric_limits<Real>::epsilon() / 2;
}

enum class TruncationMode { fixed_count, tail_bounded };

struct TruncationPolicy {
  std::size_t max_terms = std::size_t{1} << 40;
  double tail_tolerance = 0.0;
  TruncationMode mode = TruncationMode::fixed_count;

  static TruncationPolicy all() { return {}; }
  static TruncationPolicy fixed(std::size_t n) { return {n, 0.0, TruncationMode::fixed_count}; }
  static TruncationPolicy bounded(std::size_t n, double tol) {
    return {n, tol, TruncationMode::tail_bounded};
  }

  void validate() const {
    if (max_terms < 1) fail(ErrorCode::DomainError, "TruncationPolicy.max_terms must be >= 1");
    if (!(tail_tolerance >= 0)) fail(ErrorCode::DomainError, "TruncationPolicy.tail_tolerance must be >= 0");
  }
};

/// `tail_bound` certifies the omitted terms (+inf when uncertified);
/// `rounding_bound` is an a-priori bound on floating-point error of the
/// included partial sum.
template <class Real>
struct EvalResult {
  Complex<Real> value{};
  Real tail_bound = 0;
  Real rounding_bound = 0;
  std::size_t terms_used = 0;

  Real error_bound() const { return tail_bound + rounding_bound; }
};

/// Neumaier compensated accumulator.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  T value() const { return sum_ + carry_; }

 private:
  T sum_{};
  T carry_{};
};

template <class Real>
class CompensatedSum<Complex<Real>> {
 public:
  void add(Complex<Real> x) {
    re_.add(x.real());
    im_.add(x.imag());
  }
  Complex<Real> value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum<Real> re_;
  CompensatedSum<Real> im_;
};

template <class Real>
bool coincides(const Complex<Real>& z, const Complex<Real>& pole) {
  using std::abs;
  return abs(z - pole) <= 8 * std::numeric_limits<Real>::epsilon() * std::max(Real(1), abs(pole));
}

/// View of sum_n d_n / (z - t_n). Terms are consumed in storage order, which
/// callers arrange by nondecreasing |t_n|. If `exhaustive` is false the series
/// continues past the stored terms; those terms are controlled only by
/// `quotient_majorant`, which bounds |d_k / t_k| at every position k and whose
/// poles are assumed no smaller in modulus than the last stored one.
template <class Real>
struct SimpleFractionSeries {
  std::span<const Complex<Real>> residues;
  std::span<const Complex<Real>> poles;
  Majorant<Real> quotient_majorant{};
  bool exhaustive = true;
};

template <class Real>
EvalResult<Real> sum_simple_fractions(const SimpleFractionSeries<Real>& series, Complex<Real> z,
                                      const TruncationPolicy& policy) {
  using std::abs;
  policy.validate();
  if (series.residues.size() != series.poles.size())
    fail(ErrorCode::DomainError, "residues and poles differ in length");
  const std::size_t n = series.poles.size();
  const std::size_t cap = std::min<std::size_t>(policy.max_terms, n);
  const Real two_abs_z = 2 * abs(z);

  // Suffix data for tails: sum of |term| over stored terms >= k and min |t|.
  std::vector<Real> suffix_abs(n + 1, Real(0));
  std::vector<Real> suffix_min_pole(n + 1, infinity<Real>());
  std::vector<bool> suffix_hit(n + 1, false);
  for (std::size_t k = n; k-- > 0;) {
    const bool hit = coincides(z, series.poles[k]);
    suffix_hit[k] = suffix_hit[k + 1] || hit;
    suffix_abs[k] = suffix_abs[k + 1] + (hit ? infinity<Real>() : abs(series.residues[k] / (z - series.poles[k])));
    suffix_min_pole[k] = std::min(suffix_min_pole[k + 1], abs(series.poles[k]));
  }

  auto tail_at = [&](std::size_t k) -> Real {
    const Majorant<Real>& m = series.quotient_majorant;
    Real direct = infinity<Real>();
    if (series.exhaustive) direct = suffix_abs[k];
    Real bounded = infinity<Real>();
    if (m.summable()) {
      const Real next_pole = k < n ? suffix_min_pole[k] : (n > 0 ? abs(series.poles[n - 1]) : Real(0));
      if (next_pole >= two_abs_z && !(k < n && suffix_hit[k])) bounded = 2 * m.tail(k);
    }
    return std::min(direct, bounded);
  };

  std::size_t used = cap;
  Real tail = tail_at(cap);
  if (policy.mode == TruncationMode::tail_bounded) {
    const Real tol = static_cast<Real>(policy.tail_tolerance);
    std::size_t k = 0;
    for (; k <= cap; ++k) {
      if (tail_at(k) <= tol) break;
    }
    if (k > cap)
      fail(ErrorCode::TailUnbounded, "tail bound above " + std::to_string(policy.tail_tolerance) + " after " +
                                         std::to_string(cap) + " terms");
    used = k;
    tail = tail_at(k);
  }

  CompensatedSum<Complex<Real>> acc;
  Real abs_sum = 0;
  for (std::size_t k = 0; k < used; ++k) {
    if (coincides(z, series.poles[k])) fail(ErrorCode::PoleHit, "z coincides with pole #" + std::to_string(k));
    const Complex<Real> term = series.residues[k] / (z - series.poles[k]);
    acc.add(term);
    abs_sum += abs(term);
  }
  EvalResult<Real> out;
  out.value = acc.value();
  out.tail_bound = tail;
  out.rounding_bound = unit_roundoff<Real>() * (6 * abs_sum + 2 * abs(out.value));
  out.terms_used = used;
  return out;
}

/// Zeros of prod_k (1 - z^2/tau_k^2) with tau_k = base_k + shift_k. Keeping
/// the shift separate lets factors near a zero be formed as
/// ((base - z) + shift), which is exact when base and z are representable.
/// `inverse_square_majorant` bounds 1/tau_k^2 for positions past the stored
/// zeros when the product is not exhaustive.
template <class Real>
struct RealZeroProduct {
  std::vector<Real> base;
  std::vector<Real> shift;  // empty = all zero
  Majorant<Real> inverse_square_majorant{};
  bool exhaustive = true;

  std::size_t size() const { return base.size(); }
  Real magnitude(std::size_t k) const { return shift.empty() ? base[k] : base[k] + shift[k]; }
  Real shift_at(std::size_t k) const { return shift.empty() ? Real(0) : shift[k]; }

  void validate() const {
    if (!shift.empty() && shift.size() != base.size())
      fail(ErrorCode::DomainError, "zero shifts and bases differ in length");
    for (std::size_t k = 0; k < size(); ++k) {
      const Real tau = magnitude(k);
      if (!(tau > 0)) fail(ErrorCode::DomainError, "zero magnitudes must be positive");
      if (k > 0 && !(tau > magnitude(k - 1)))
        fail(ErrorCode::DomainError, "zero magnitudes must be strictly increasing (index " + std::to_string(k) + ")");
    }
  }
};

namespace detail {

/// 1 - z^2/tau^2 computed as (tau - z)(tau + z)/tau^2 with tau - z formed
/// via the split base + shift.
template <class Real>
Complex<Real> zero_factor(Real base, Real shift, Complex<Real> z) {
  const Real tau = base + shift;
  const Complex<Real> minus = (Complex<Real>(base) - z) + shift;
  const Complex<Real> plus = (Complex<Real>(base) + z) + shift;
  return (minus / tau) * (plus / tau);
}

}  // namespace detail

/// Product in log form: value = (negative ? -1 : 1) exp(log_abs + i arg).
/// `log_tail_bound` bounds |log(full) - log(truncated)| (+inf if uncertified).
template <class Real>
struct LogEvalResult {
  Real log_abs = 0;
  Real arg = 0;
  bool negative = false;  // real z: sign of the real value
  bool is_zero = false;
  Real log_tail_bound = 0;
  std::size_t terms_used = 0;
};

template <class Real>
LogEvalResult<Real> log_real_zero_product(const RealZeroProduct<Real>& product, Complex<Real> z,
                                          const TruncationPolicy& policy) {
  using std::abs;
  policy.validate();
  product.validate();
  const std::size_t n = product.size();
  const std::size_t cap = std::min<std::size_t>(policy.max_terms, n);
  const Real z2 = std::norm(z);

  std::vector<Real> suffix_inv_sq(n + 1, Real(0));
  for (std::size_t k = n; k-- > 0;) {
    const Real tau = product.magnitude(k);
    suffix_inv_sq[k] = suffix_inv_sq[k + 1] + 1 / (tau * tau);
  }
  // |log prod_{j>=k}| <= (4/3)|z|^2 sum_{j>=k} tau_j^-2 once |z| < tau_k / 2.
  auto log_tail = [&](std::size_t k) -> Real {
    Real inv_sq = suffix_inv_sq[k];
    if (!product.exhaustive) {
      if (!product.inverse_square_majorant.summable()) return infinity<Real>();
      inv_sq += product.inverse_square_majorant.tail(n);
    }
    if (inv_sq == 0) return 0;
    const Real next = k < n ? product.magnitude(k) : (n > 0 ? product.magnitude(n - 1) : Real(0));
    if (!(abs(z) < next / 2)) return infinity<Real>();
    return Real(4) / 3 * z2 * inv_sq;
  };
  auto log_factor = [&](std::size_t k) {
    const Real tau = product.magnitude(k);
    const Complex<Real> w = z * z / (tau * tau);
    // log|1 - w| = log1p(-2 Re w + |w|^2) / 2 without cancellation for small w
    if (abs(w) < Real(0.5)) return std::log1p(-2 * w.real() + std::norm(w)) / 2;
    return std::log(abs(detail::zero_factor(product.base[k], product.shift_at(k), z)));
  };

  std::size_t used = cap;
  if (policy.mode == TruncationMode::tail_bounded) {
    // absolute tolerance on the value: exp(log|P_k|) expm1(L_k) <= tol
    const Real tol = static_cast<Real>(policy.tail_tolerance);
    Real log_abs = 0;
    std::size_t k = 0;
    for (;; ++k) {
      const Real lt = log_tail(k);
      if (std::isfinite(static_cast<double>(lt)) && std::exp(log_abs) * std::expm1(lt) <= tol) break;
      if (k == cap) fail(ErrorCode::TailUnbounded, "product tail above tolerance after " + std::to_string(cap) + " factors");
      log_abs += log_factor(k);
    }
    used = k;
  }

  LogEvalResult<Real> out;
  out.terms_used = used;
  const bool real_axis = z.imag() == 0;
  CompensatedSum<Real> log_mod;
  CompensatedSum<Real> phase;
  for (std::size_t k = 0; k < used; ++k) {
    const Complex<Real> f = detail::zero_factor(product.base[k], product.shift_at(k), z);
    if (f == Complex<Real>(0)) {
      out.is_zero = true;
      out.log_abs = -infinity<Real>();
      return out;
    }
    log_mod.add(log_factor(k));
    if (real_axis) {
      if (f.real() < 0) out.negative = !out.negative;
    } else {
      phase.add(std::arg(f));
    }
  }
  out.log_abs = log_mod.value();
  out.arg = phase.value();
  out.log_tail_bound = log_tail(used);
  return out;
}

template <class Real>
EvalResult<Real> eval_real_zero_product(const RealZeroProduct<Real>& product, Complex<Real> z,
                                        const TruncationPolicy& policy) {
  const auto lg = log_real_zero_product(product, z, policy);
  EvalResult<Real> out;
  out.terms_used = lg.terms_used;
  if (lg.is_zero) return out;
  const Real modulus = std::exp(lg.log_abs);
  if (z.imag() == 0)
    out.value = lg.negative ? -modulus : modulus;
  else
    out.value = std::polar(modulus, lg.arg);
  out.tail_bound = std::isfinite(static_cast<double>(lg.log_tail_bound)) ? modulus * std::expm1(lg.log_tail_bound)
                                                                         : infinity<Real>();
  out.rounding_bound = modulus * unit_roundoff<Real>() * Real(8 * (lg.terms_used + 1));
  return out;
}

struct ZeroSearchOptions {
  double tolerance = 1e-12;
  int max_secant_steps = 16;
};

namespace detail {

/// (x - left)(x - right) * sum_n d_n / (x - t_n) for the gap (left, right):
/// finite and smooth across the whole closed gap.
template <class Real>
Real gap_regularized(std::span<const Real> residues, std::span<const Real> poles, std::size_t gap, Real x) {
  const Real left = poles[gap];
  const Real right = poles[gap + 1];
  const Real dl = x - left;
  const Real dr = x - right;
  CompensatedSum<Real> rest;
  for (std::size_t k = 0; k < poles.size(); ++k) {
    if (k == gap || k == gap + 1) continue;
    rest.add(residues[k] / (x - poles[k]));
  }
  return residues[gap] * dr + residues[gap + 1] * dl + dl * dr * rest.value();
}

}  // namespace detail

/// Zeros of sum d_n/(x - t_n) with d_n > 0 and t_n strictly increasing,
/// restricted to the half-open window [lo, hi). The sum decreases from +inf to
/// -inf on every gap, so each gap meeting the window holds at most one zero.
template <class Real>
std::vector<Real> bracketed_real_zeros(std::span<const Real> residues, std::span<const Real> poles, Real lo, Real hi,
                                       const ZeroSearchOptions& options = {}) {
  using std::abs;
  if (residues.size() != poles.size()) fail(ErrorCode::DomainError, "residues and poles differ in length");
  for (std::size_t k = 0; k < residues.size(); ++k)
    if (!(residues[k] > 0))
      fail(ErrorCode::NonPositiveResidue, "residue #" + std::to_string(k) + " is not strictly positive");
  for (std::size_t k = 1; k < poles.size(); ++k)
    if (!(poles[k] > poles[k - 1])) fail(ErrorCode::DomainError, "poles must be strictly increasing");
  if (!(lo < hi)) fail(ErrorCode::DomainError, "empty window");

  const Real tol = static_cast<Real>(options.tolerance);
  std::vector<Real> zeros;
  if (poles.size() < 2) return zeros;

  auto first = std::upper_bound(poles.begin(), poles.end(), lo);
  std::size_t gap = first == poles.begin() ? 0 : static_cast<std::size_t>(first - poles.begin()) - 1;
  for (; gap + 1 < poles.size() && poles[gap] < hi; ++gap) {
    const Real left = poles[gap];
    const Real right = poles[gap + 1];
    if (right <= lo) continue;
    // g < 0 at the left pole, > 0 at the right pole, g = -(x-l)(r-x) f
    auto g = [&](Real x) { return detail::gap_regularized(residues, poles, gap, x); };
    Real a = std::max(left, lo);
    Real b = std::min(right, hi);
    Real ga = g(a);
    Real gb = g(b);
    if (a > left && ga > 0) continue;         // zero lies left of the window
    if (b < right && gb <= 0) continue;       // zero at or right of hi
    if (ga == 0) {
      zeros.push_back(a);
      continue;
    }
    while (b - a > tol) {
      const Real mid = a + (b - a) / 2;
      if (mid <= a || mid >= b) break;
      const Real gm = g(mid);
      if (gm == 0) {
        a = b = mid;
        break;
      }
      if (gm < 0) {
        a = mid;
        ga = gm;
      } else {
        b = mid;
        gb = gm;
      }
    }
    Real x = a + (b - a) / 2;
    // safeguarded secant on the regularized function inside [a, b]
    Real x0 = a, g0 = ga, x1 = b, g1 = gb;
    for (int step = 0; step < options.max_secant_steps && g1 != g0; ++step) {
      Real x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
      if (!(x2 >= a && x2 <= b)) x2 = a + (b - a) / 2;
      const Real g2 = g(x2);
      x = x2;
      if (g2 == 0 || abs(x2 - x1) <= 4 * std::numeric_limits<Real>::epsilon() * std::max(Real(1), abs(x2))) break;
      if (g2 < 0) {
        a = x2;
        ga = g2;
      } else {
        b = x2;
        gb = g2;
      }
      x0 = x1;
      g0 = g1;
      x1 = x2;
      g1 = g2;
    }
    if (x >= lo && x < hi) zeros.push_back(x);
  }
  return zeros;
}

enum class Growth { converging, diverging, undetermined };

inline const char* to_string(Growth g) {
  switch (g) {
    case Growth::converging: return "converging";
    case Growth::diverging: return "diverging";
    case Growth::undetermined: return "undetermined";
  }
  return "undetermined";
}

/// Horizons K/8, K/4, K/2, K (deduplicated, each >= 1).
inline std::vector<std::size_t> doubling_horizons(std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t div : {8u, 4u, 2u, 1u}) {
    const std::size_t h = std::max<std::size_t>(1, horizon / div);
    if (out.empty() || out.back() != h) out.push_back(h);
  }
  return out;
}

/// Finite-horizon evidence from monotone partial sums at doubling horizons:
/// diverging when the last doubling adds >= 10% of the previous value,
/// converging when it adds <= `relative_tail` of the total and increments
/// are not growing.
template <class Real>
Growth classify_partial_sums(std::span<const Real> partial_sums, Real relative_tail = Real(1e-2)) {
  const std::size_t n = partial_sums.size();
  if (n < 2) return Growth::undetermined;
  const Real last = partial_sums[n - 1];
  const Real prev = partial_sums[n - 2];
  const Real inc = last - prev;
  if (inc > 0 && inc >= Real(0.1) * prev) return Growth::diverging;
  const Real prev_inc = n >= 3 ? prev - partial_sums[n - 3] : inc;
  if (inc <= relative_tail * std::max(last, std::numeric_limits<Real>::min()) && inc <= prev_inc + relative_tail * last)
    return Growth::converging;
  return Growth::undetermined;
}

}  // namespace rklab
