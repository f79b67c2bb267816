#pragma once

// Builders for the explicit constructions: a generating ratio whose
// biorthogonal system is incomplete, the b_n with sum b_n = inf example and
// its second multiplier S_1, and the size-M atomization builder.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "rklab/defect.hpp"
#include "rklab/generating.hpp"
#include "rklab/space.hpp"

namespace rklab {

struct InvariantCheck {
  std::string name;
  double value = 0;
  double bound = 0;
  bool pass = false;
};

inline bool all_pass(const std::vector<InvariantCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.pass; });
}

// ---------------------------------------------------------------------------
// Incomplete biorthogonal system from sum b_n < inf.

template <class Real>
struct Theorem1Recipe {
  std::vector<long> sparse_labels;           // n_k
  std::vector<std::size_t> sparse_positions;
  std::vector<Real> big_disk_radii;          // |t_{n_k}| / 10
  std::vector<Real> small_disk_radii;        // h_n per stored position (0 on sparse positions)
  std::vector<Real> coefficients;            // c_n = d_n / t_n (NaN where t_n = 0)
  std::vector<Real> residues;                // d_n = c_n t_n
  Real eta = 0;                              // non-sparse scale: d_n = eta b_n^{1/2}
  Real sparse_total = 0;                     // sum_k c_{n_k} t_{n_k}
  int perturbations = 0;                     // c_0 rescalings by 1 + 1e-3
  std::vector<Real> sparse_jumps;            // (c t)^2 / b at each n_k
  std::vector<InvariantCheck> invariants;
};

template <class Real>
struct Theorem1Bundle {
  Theorem1Recipe<Real> recipe;
  GeneratingRatio<Real> ratio;
  SpaceElement<Real> defect;
  std::vector<Real> zeros;                   // working window, ascending
  Real min_zero_node_distance = 0;
};

struct Theorem1Options {
  std::size_t zero_count = 30;
  double collision_tolerance = 1e-8;
  int max_perturbations = 8;
  double eta_safety = 0.5;
};

namespace detail {

template <class Real>
Majorant<Real> sqrt_majorant(const Majorant<Real>& m) {
  using std::sqrt;
  if (m.kind == MajorantKind::geometric) return Majorant<Real>::geometric(sqrt(m.scale), sqrt(m.rate));
  if (m.kind == MajorantKind::power) return Majorant<Real>::power(sqrt(m.scale), m.rate / 2);
  return {};
}

/// Partial sums of f(k) over doubling horizons of [0, K).
template <class Real, class F>
std::vector<Real> doubling_sums(std::size_t K, F term) {
  std::vector<Real> out;
  const auto hs = doubling_horizons(K);
  CompensatedSum<Real> acc;
  std::size_t next = 0;
  for (std::size_t k = 0; k < K; ++k) {
    acc.add(term(k));
    if (next < hs.size() && k + 1 == hs[next]) {
      out.push_back(acc.value());
      ++next;
    }
  }
  return out;
}

template <class Real>
Real min_node_distance(const std::vector<Real>& sorted_nodes, Real x) {
  auto it = std::lower_bound(sorted_nodes.begin(), sorted_nodes.end(), x);
  Real d = infinity<Real>();
  if (it != sorted_nodes.end()) d = std::min(d, std::abs(*it - x));
  if (it != sorted_nodes.begin()) d = std::min(d, std::abs(*(it - 1) - x));
  return d;
}

}  // namespace detail

template <class Real>
Theorem1Bundle<Real> build_theorem1(SystemPtr<Real> system, const Theorem1Options& options = {}) {
  using std::abs;
  using std::sqrt;
  const auto& sys = *system;
  if (!sys.real_nodes) fail(ErrorCode::DomainError, "construction needs real nodes");
  const std::size_t N = sys.size();

  // sum b_n < inf: declared majorant, else partial-sum evidence
  bool summable = false;
  if (sys.weight_majorant.summable()) {
    summable = true;
    for (std::size_t k = 0; k < N; ++k)
      if (sys.weights[k] > sys.weight_majorant.term(k) * (1 + Real(1e-12))) summable = false;
  }
  if (!summable) {
    auto sums = detail::doubling_sums<Real>(N, [&](std::size_t k) { return sys.weights[k]; });
    summable = classify_partial_sums<Real>(sums) == Growth::converging;
  }
  if (!summable) fail(ErrorCode::NotSummable, "no evidence that sum b_n converges");

  Theorem1Recipe<Real> rc;
  // sparse subsequence with |t_{n_{k+1}}| > 2 |t_{n_k}|, taken in stream order
  Real last = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const Real m = abs(sys.nodes[k]);
    if (m == 0) continue;
    if (rc.sparse_positions.empty() ? m >= 1 : m > 2 * last) {
      rc.sparse_positions.push_back(k);
      rc.sparse_labels.push_back(sys.indices[k]);
      last = m;
    }
  }
  if (rc.sparse_positions.size() < 3)
    fail(ErrorCode::SparsificationFailed, "fewer than three sparse indices within the node horizon");
  std::vector<bool> sparse(N, false);
  for (std::size_t p : rc.sparse_positions) sparse[p] = true;

  rc.small_disk_radii.assign(N, Real(0));
  for (std::size_t k = 0; k < N; ++k)
    if (!sparse[k]) rc.small_disk_radii[k] = Real(0.25) / (1 + std::norm(sys.nodes[k]));

  // sparse residues d = b^{1/2}; non-sparse d = eta b^{1/2} with eta from the two tenth-inequalities
  CompensatedSum<Real> total, a0, b0;
  for (std::size_t k = 0; k < N; ++k) {
    const Real sb = sqrt(sys.weights[k]);
    if (sparse[k]) {
      total.add(sb);
    } else {
      a0.add(sb * std::norm(sys.nodes[k]) / rc.small_disk_radii[k]);
      b0.add(sb);
    }
  }
  rc.sparse_total = total.value();
  const Real worst = std::max(a0.value(), b0.value());
  rc.eta = static_cast<Real>(options.eta_safety) * (rc.sparse_total / 10) / worst;
  if (!(rc.eta > 0) || !std::isfinite(static_cast<double>(rc.eta)))
    fail(ErrorCode::SparsificationFailed, "cannot scale non-sparse residues below the sparse total");
  rc.residues.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Real sb = sqrt(sys.weights[k]);
    rc.residues[k] = sparse[k] ? sb : rc.eta * sb;
  }

  Theorem1Bundle<Real> out;
  const auto order = sys.order_by_node();
  std::vector<Real> sorted_nodes;
  for (std::size_t k : order) sorted_nodes.push_back(sys.nodes[k].real());
  std::size_t origin = 0;  // "c_0": the node nearest 0
  for (std::size_t k = 0; k < N; ++k)
    if (abs(sys.nodes[k]) < abs(sys.nodes[origin])) origin = k;

  GeneratingRatio<Real> g{system, {}, detail::sqrt_majorant(sys.weight_majorant), detail::sqrt_majorant(sys.weight_majorant)};
  for (int attempt = 0;; ++attempt) {
    g.residues.assign(rc.residues.begin(), rc.residues.end());
    // zeros nearest 0: search a window holding about twice the requested count
    const Real W = static_cast<Real>(options.zero_count) + 1;
    auto zs = zeros(g, std::max(-W, sorted_nodes.front()), std::min(W, sorted_nodes.back()));
    std::stable_sort(zs.begin(), zs.end(), [](Real a, Real b) { return abs(a) < abs(b); });
    if (zs.size() > options.zero_count) zs.resize(options.zero_count);
    std::sort(zs.begin(), zs.end());
    Real closest = infinity<Real>();
    for (Real z : zs) closest = std::min(closest, detail::min_node_distance(sorted_nodes, z));
    out.zeros = zs;
    out.min_zero_node_distance = closest;
    if (closest >= static_cast<Real>(options.collision_tolerance)) break;
    if (attempt >= options.max_perturbations)
      fail(ErrorCode::SparsificationFailed, "zeros keep colliding with nodes after perturbing c_0");
    rc.residues[origin] *= Real(1) + Real(1e-3);
    ++rc.perturbations;
  }

  rc.coefficients.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Real t = sys.nodes[k].real();
    rc.coefficients[k] = t == 0 ? std::numeric_limits<Real>::quiet_NaN() : rc.residues[k] / t;
  }
  for (std::size_t p : rc.sparse_positions) rc.sparse_jumps.push_back(rc.residues[p] * rc.residues[p] / sys.weights[p]);
  for (std::size_t i = 0; i < rc.sparse_positions.size(); ++i)
    rc.big_disk_radii.push_back(abs(sys.nodes[rc.sparse_positions[i]]) / 10);

  // invariants
  auto add = [&](std::string name, Real value, Real bound, bool pass) {
    rc.invariants.push_back({std::move(name), static_cast<double>(value), static_cast<double>(bound), pass});
  };
  Real min_residue = infinity<Real>();
  for (Real d : rc.residues) min_residue = std::min(min_residue, d);
  add("residues_positive", min_residue, 0, min_residue > 0);

  Real worst_ratio = infinity<Real>();
  for (std::size_t i = 0; i + 1 < rc.sparse_positions.size(); ++i)
    worst_ratio = std::min(worst_ratio, abs(sys.nodes[rc.sparse_positions[i + 1]]) / abs(sys.nodes[rc.sparse_positions[i]]));
  add("sparse_doubling", worst_ratio, 2, worst_ratio > 2);

  bool disjoint = true;
  for (std::size_t i = 0; i + 1 < rc.sparse_positions.size(); ++i) {
    const Real gap = abs(sys.nodes[rc.sparse_positions[i + 1]] - sys.nodes[rc.sparse_positions[i]]);
    if (!(gap > rc.big_disk_radii[i] + rc.big_disk_radii[i + 1])) disjoint = false;
  }
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const std::size_t a = order[i], b = order[i + 1];
    if (sparse[a] || sparse[b]) continue;
    if (!(sorted_nodes[i + 1] - sorted_nodes[i] > rc.small_disk_radii[a] + rc.small_disk_radii[b])) disjoint = false;
  }
  add("disks_disjoint", disjoint ? 1 : 0, 1, disjoint);

  CompensatedSum<Real> hsum, A, B;
  for (std::size_t k = 0; k < N; ++k) {
    if (sparse[k]) continue;
    hsum.add(rc.small_disk_radii[k]);
    A.add(rc.residues[k] * abs(sys.nodes[k]) / rc.small_disk_radii[k]);
    B.add(rc.residues[k]);
  }
  add("sum_h_below_one", hsum.value(), 1, hsum.value() < 1);
  add("nonsparse_ct2_over_h_below_tenth", A.value(), rc.sparse_total / 10, A.value() < rc.sparse_total / 10);
  add("nonsparse_ct_below_tenth", B.value(), rc.sparse_total / 10, B.value() < rc.sparse_total / 10);

  auto c2b = detail::doubling_sums<Real>(N, [&](std::size_t k) {
    const Real t = sys.nodes[k].real();
    return t == 0 ? Real(0) : rc.residues[k] * rc.residues[k] / (t * t * sys.weights[k]);
  });
  auto ct2b = detail::doubling_sums<Real>(N, [&](std::size_t k) { return rc.residues[k] * rc.residues[k] / sys.weights[k]; });
  const Growth gc = classify_partial_sums<Real>(c2b), gct = classify_partial_sums<Real>(ct2b);
  add("c2_over_b_converges", c2b.back(), 0, gc == Growth::converging);
  add("ct2_over_b_diverges", ct2b.back(), 0, gct == Growth::diverging);

  out.ratio = g;
  out.recipe = std::move(rc);
  if (!all_pass(out.recipe.invariants)) {
    std::string failed;
    for (const auto& c : out.recipe.invariants)
      if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
    fail(ErrorCode::SparsificationFailed, "recipe invariants failed: " + failed);
  }
  out.defect = defect_element(out.ratio, CandidateS<Real>::constant(Real(1)));
  return out;
}

// ---------------------------------------------------------------------------
// b_n = |S(n)|^-2 off the dyadic points, S = prod (1 - z^2/(2^k + 1/2)^2).

template <class Real>
RealZeroProduct<Real> dyadic_product(int first, int K, const std::function<Real(int)>& shift) {
  RealZeroProduct<Real> p;
  for (int k = first; k <= K; ++k) {
    p.base.push_back(std::ldexp(Real(1), k));
    p.shift.push_back(shift(k));
  }
  p.validate();
  return p;
}

inline bool is_signed_power_of_two(long n) {
  const unsigned long m = static_cast<unsigned long>(n < 0 ? -n : n);
  return m != 0 && (m & (m - 1)) == 0;
}

template <class Real>
struct Example13Bundle {
  int depth = 0;
  long horizon = 0;
  CandidateS<Real> S;
  GeneratingRatio<Real> ratio;            // d_n = 1 / (pi S(n)) over |n| <= horizon
  std::vector<long> bsum_horizons;        // N
  std::vector<Real> bsum;                 // sum_{|n| <= N} b_n
  Real bsum_factor = 0;                   // bsum(2^13) / bsum(2^10)
  bool bsum_nondecreasing = false;
  long dyadic_nodes_added = 0;            // count of +-2^k in (2^10, 2^13]
  Real bsum_nondyadic_increment = 0;      // increment not from the unit weights
};

template <class Real>
Example13Bundle<Real> build_example_bn_infty(int K, long horizon = 1L << 14) {
  using std::log;
  if (K < 2) fail(ErrorCode::DomainError, "depth must be >= 2");
  Example13Bundle<Real> b;
  b.depth = K;
  b.horizon = horizon;
  b.S = CandidateS<Real>::product(dyadic_product<Real>(1, K, [](int) { return Real(0.5); }));
  const auto& prod = std::get<RealZeroProduct<Real>>(b.S.form);
  const Real pi = std::numbers::pi_v<Real>;

  std::vector<Real> logs;  // log|S(n)| by stream position
  std::vector<Real> res;
  auto weight = [&](long n) -> Real {
    if (is_signed_power_of_two(n)) return Real(1);
    return std::exp(-2 * log_real_zero_product(prod, Complex<Real>(static_cast<Real>(n)), TruncationPolicy::all()).log_abs);
  };
  auto sys = integer_system<Real>(horizon, weight, {}, {}, true);
  for (long n : sys.indices) res.push_back(Real(1) / (pi * evaluate(b.S, Complex<Real>(static_cast<Real>(n))).value.real()));
  // |S(x)| grows past the last zero, so b_n <= 1 beyond 2 tau_K is not
  // needed here; admissibility follows from b_n <= 1.
  sys.decay_majorant = Majorant<Real>::power(8, 2);
  auto shared = share(std::move(sys));
  b.ratio = GeneratingRatio<Real>{shared, {}};
  for (Real r : res) b.ratio.residues.emplace_back(r);

  for (int e = 10; e <= 13; ++e) b.bsum_horizons.push_back(1L << e);
  CompensatedSum<Real> acc;
  std::size_t next = 0;
  for (std::size_t k = 0; k < shared->size() && next < b.bsum_horizons.size(); ++k) {
    acc.add(shared->weights[k]);
    // positions 2N-1, 2N hold +-N; record after -N
    const long n = shared->indices[k];
    if (n == -b.bsum_horizons[next]) {
      b.bsum.push_back(acc.value());
      ++next;
    }
  }
  b.bsum_nondecreasing = std::is_sorted(b.bsum.begin(), b.bsum.end());
  b.bsum_factor = b.bsum.back() / b.bsum.front();
  for (long n = b.bsum_horizons.front() + 1; n <= b.bsum_horizons.back(); ++n)
    if (is_signed_power_of_two(n)) b.dyadic_nodes_added += 2;
  b.bsum_nondyadic_increment = b.bsum.back() - b.bsum.front() - Real(b.dyadic_nodes_added);
  return b;
}

template <class Real>
struct IdentityResidual {
  Complex<Real> z;
  Complex<Real> lhs;
  Complex<Real> rhs;
  Real residual = 0;
  Real tail_bound = 0;
};

/// |cos(pi z) / (S(z) sin(pi z)) - sum_{|n| <= N} 1 / (pi S(n) (z - n))|.
/// The omitted terms satisfy |S(n)| >= |S(N)| (n/N)^{2K} for |n| >= N >= 2 tau_K,
/// so for |z| <= N/2 they are bounded by 4 / (pi |S(N)|) (1/N + 1/(2K)).
template <class Real>
IdentityResidual<Real> example13_identity(const Example13Bundle<Real>& b, Complex<Real> z) {
  const Real pi = std::numbers::pi_v<Real>;
  IdentityResidual<Real> r{z};
  const Complex<Real> Sz = evaluate(b.S, z).value;
  r.lhs = std::cos(pi * z) / (Sz * std::sin(pi * z));
  const auto sum = ratio_eval(b.ratio, z);
  r.rhs = sum.value;
  r.residual = std::abs(r.lhs - r.rhs);
  const Real N = static_cast<Real>(b.horizon);
  const auto& prod = std::get<RealZeroProduct<Real>>(b.S.form);
  const Real tauK = prod.magnitude(prod.size() - 1);
  if (N >= 2 * tauK && std::abs(z) <= N / 2) {
    const Real SN = std::abs(evaluate(b.S, Complex<Real>(N)).value);
    r.tail_bound = 4 / (pi * SN) * (1 / N + Real(1) / (2 * b.depth)) + sum.rounding_bound;
  } else {
    r.tail_bound = infinity<Real>();
  }
  return r;
}

template <class Real>
struct S1Result {
  CandidateS<Real> S1;
  std::vector<Real> dyadic_terms;      // |S_1(2^k)|^2 + |S_1(-2^k)|^2, k = 0..K
  std::vector<Real> dyadic_partial;    // cumulative
  Real cauchy_tail = 0;                // sum over K/2 < k <= K
  Real ratio_bound = 0;                // C: |S_1(n)| <= C |S(n)| on |n| <= 2^K
  long ratio_bound_at = 0;
};

template <class Real>
S1Result<Real> build_S1(int K, const std::function<Real(int)>& delta, double cauchy_target = 1e-6) {
  if (K < 2) fail(ErrorCode::DomainError, "depth must be >= 2");
  for (int k = 2; k <= K; ++k) {
    const Real d = delta(k);
    if (!(d > 0 && d < 1)) fail(ErrorCode::DomainError, "delta_k must lie in (0, 1)");
    if (k > 2 && d > delta(k - 1)) fail(ErrorCode::DomainError, "delta_k must be nonincreasing");
  }
  S1Result<Real> r;
  r.S1 = CandidateS<Real>::product(dyadic_product<Real>(2, K, delta));
  const auto S = CandidateS<Real>::product(dyadic_product<Real>(1, K, [](int) { return Real(0.5); }));
  CompensatedSum<Real> acc;
  for (int k = 0; k <= K; ++k) {
    const Real x = std::ldexp(Real(1), k);
    const Real term = 2 * std::norm(evaluate(r.S1, Complex<Real>(x)).value);
    r.dyadic_terms.push_back(term);
    acc.add(term);
    r.dyadic_partial.push_back(acc.value());
  }
  // summed directly: the difference of partials cancels against the O(1) low terms
  CompensatedSum<Real> tail;
  for (int k = K / 2 + 1; k <= K; ++k) tail.add(r.dyadic_terms[static_cast<std::size_t>(k)]);
  r.cauchy_tail = tail.value();
  if (!(r.cauchy_tail <= static_cast<Real>(cauchy_target)))
    fail(ErrorCode::ScheduleTooLarge, "dyadic tail of |S_1(2^k)|^2 is " + std::to_string(static_cast<double>(r.cauchy_tail)) +
                                          " above " + std::to_string(cauchy_target));
  const long top = 1L << K;
  for (long n = 0; n <= top; ++n) {
    const Complex<Real> z(static_cast<Real>(n));
    const Real q = std::exp(log_abs(r.S1, z) - log_abs(S, z));
    if (q > r.ratio_bound) {
      r.ratio_bound = q;
      r.ratio_bound_at = n;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Size-M builder: atomized counting function and S = prod over its jumps.

struct SizeRecipe {
  std::vector<double> jumps;     // half-integers, strictly increasing
  double sup_deviation = 0;      // sup |M - mu| on [1, fidelity range]
  double sup_deviation_at = 0;
  double fidelity_range = 0;
};

template <class Real>
struct BigSizeBundle {
  SizeRecipe recipe;
  CandidateS<Real> S;
  GeneratingRatio<Real> ratio;   // t_n = n, b_n = |S(n)|^-1, d_n = 1 / (pi S(n))
};

/// Counting function value at r.
inline long mu_at(const std::vector<double>& jumps, double r) {
  return static_cast<long>(std::upper_bound(jumps.begin(), jumps.end(), r) - jumps.begin());
}

/// Unit jumps: one at 1/2, then for j >= 2 at the smallest free half-integer
/// >= inf{r : M(r) >= j}; zeros up to `range`.
template <class Real>
BigSizeBundle<Real> build_big_size(const std::function<double(double)>& M, double range, double fidelity_range,
                                   long horizon = 1L << 12) {
  if (!(range >= fidelity_range && fidelity_range >= 1)) fail(ErrorCode::DomainError, "need range >= fidelity range >= 1");
  // M increasing and M(r)/r decreasing on a log grid of [1, range]
  const int G = 4000;
  double prev_m = M(1.0), prev_q = prev_m;
  for (int i = 1; i <= G; ++i) {
    const double r = std::pow(range, double(i) / G);
    const double m = M(r);
    if (!(m > prev_m)) fail(ErrorCode::DomainError, "M must be increasing");
    if (!(m / r < prev_q)) fail(ErrorCode::DomainError, "M(r)/r must be decreasing (fails near r = " + std::to_string(r) + ")");
    prev_m = m;
    prev_q = m / r;
  }
  BigSizeBundle<Real> b;
  auto& rc = b.recipe;
  rc.fidelity_range = fidelity_range;
  rc.jumps.push_back(0.5);
  for (long j = 2;; ++j) {
    if (M(range) < double(j)) break;
    double lo = 0, hi = range;
    if (M(0) >= double(j)) hi = 0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (M(mid) >= double(j) ? hi : lo) = mid;
    }
    double h = std::ceil(hi - 0.5) + 0.5;
    h = std::max(h, rc.jumps.back() + 1.0);
    if (h > range) break;
    rc.jumps.push_back(h);
  }
  // sup |M - mu| on [1, fidelity_range]: mu is constant between jumps and M
  // is monotone, so interval endpoints suffice
  std::vector<double> pts{1.0, fidelity_range};
  for (double t : rc.jumps)
    if (t >= 1 && t <= fidelity_range) pts.push_back(t);
  for (double t : pts) {
    const double left = std::max(1.0, std::nextafter(t, 0.0));
    for (double r : {left, t}) {
      const double dev = std::abs(M(r) - double(mu_at(rc.jumps, r)));
      if (dev > rc.sup_deviation) {
        rc.sup_deviation = dev;
        rc.sup_deviation_at = r;
      }
    }
  }
  RealZeroProduct<Real> p;
  for (double t : rc.jumps) p.base.push_back(static_cast<Real>(t));
  b.S = CandidateS<Real>::product(p);

  const auto& prod = std::get<RealZeroProduct<Real>>(b.S.form);
  auto weight = [&](long n) {
    return std::exp(-log_real_zero_product(prod, Complex<Real>(static_cast<Real>(n)), TruncationPolicy::all()).log_abs);
  };
  auto sys = share(integer_system<Real>(horizon, weight, {}, {}, true));
  const Real pi = std::numbers::pi_v<Real>;
  b.ratio = GeneratingRatio<Real>{sys, {}};
  for (long n : sys->indices)
    b.ratio.residues.emplace_back(Real(1) / (pi * evaluate(b.S, Complex<Real>(static_cast<Real>(n))).value.real()));
  return b;
}

}  // namespace rklab
