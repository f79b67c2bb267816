#pragma once

// Coordinate model of H(T, b): f(z) = sum_n a_n b_n^{1/2} / (z - t_n),
// ||f||^2 = sum_n |a_n|^2. Nodes are stored in stream order (nondecreasing
// modulus for generated systems) so majorants are indexed by position.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rklab/error.hpp"
#include "rklab/majorant.hpp"
#include "rklab/numerics.hpp"

namespace rklab {

template <class Real>
struct NodeWeightSystem {
  std::vector<long> indices;              // labels n (Z-indexed sets allowed)
  std::vector<Complex<Real>> nodes;       // t_n
  std::vector<Real> weights;              // b_n > 0
  bool real_nodes = true;
  Majorant<Real> decay_majorant{};        // bounds b_k / (1 + |t_k|^2) by position
  Majorant<Real> weight_majorant{};       // bounds b_k by position (optional)
  bool truncated = false;                 // stored nodes are a finite section of an infinite set

  std::size_t size() const { return nodes.size(); }

  void validate() const {
    if (nodes.size() != weights.size() || nodes.size() != indices.size())
      fail(ErrorCode::DomainError, "nodes, weights and indices differ in length");
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (!(weights[k] > 0) || !std::isfinite(static_cast<double>(std::log(weights[k]))))
        fail(ErrorCode::DomainError, "weight at index " + std::to_string(indices[k]) + " is not positive and finite");
      if (real_nodes && nodes[k].imag() != 0)
        fail(ErrorCode::DomainError, "system flagged real has a complex node");
    }
    std::vector<std::size_t> order(nodes.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    auto less = [&](std::size_t a, std::size_t b) {
      return nodes[a].real() < nodes[b].real() || (nodes[a].real() == nodes[b].real() && nodes[a].imag() < nodes[b].imag());
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t k = 1; k < order.size(); ++k)
      if (nodes[order[k]] == nodes[order[k - 1]])
        fail(ErrorCode::DomainError, "nodes are not pairwise distinct (index " + std::to_string(indices[order[k]]) + ")");
  }

  /// Position of label n, or size() if absent.
  std::size_t position_of(long n) const {
    for (std::size_t k = 0; k < indices.size(); ++k)
      if (indices[k] == n) return k;
    return size();
  }

  /// Positions sorted by real node value (real systems).
  std::vector<std::size_t> order_by_node() const {
    std::vector<std::size_t> order(size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a].real() < nodes[b].real(); });
    return order;
  }

  template <class Other>
  NodeWeightSystem<Other> cast() const {
    NodeWeightSystem<Other> out;
    out.indices = indices;
    for (const auto& t : nodes) out.nodes.emplace_back(static_cast<Other>(t.real()), static_cast<Other>(t.imag()));
    for (Real b : weights) out.weights.push_back(static_cast<Other>(b));
    out.real_nodes = real_nodes;
    out.decay_majorant = decay_majorant.template cast<Other>();
    out.weight_majorant = weight_majorant.template cast<Other>();
    out.truncated = truncated;
    return out;
  }
};

template <class Real>
using SystemPtr = std::shared_ptr<const NodeWeightSystem<Real>>;

template <class Real>
SystemPtr<Real> share(NodeWeightSystem<Real> system) {
  system.validate();
  return std::make_shared<const NodeWeightSystem<Real>>(std::move(system));
}

// ---------------------------------------------------------------------------
// Generated systems t_n = n.

enum class IndexSet { integers, naturals };

enum class WeightKind { constant, geometric, exponential, power, monomial };

/// constant: b = c; geometric: b = c r^{|n|}; exponential: b = c exp(-A |n|^alpha);
/// power: b = c (1 + |n|)^p; monomial: b = c |n|^p (b_0 = c).
struct WeightLaw {
  WeightKind kind = WeightKind::constant;
  double scale = 1.0;
  double rate = 0.0;    // r, A or p
  double alpha = 1.0;   // exponential only

  template <class Real>
  Real operator()(long n) const {
    using std::exp;
    using std::pow;
    const Real m = static_cast<Real>(n < 0 ? -n : n);
    const Real c = static_cast<Real>(scale);
    switch (kind) {
      case WeightKind::constant: return c;
      case WeightKind::geometric: return c * pow(static_cast<Real>(rate), m);
      case WeightKind::exponential: return c * exp(-static_cast<Real>(rate) * pow(m, static_cast<Real>(alpha)));
      case WeightKind::power: return c * pow(1 + m, static_cast<Real>(rate));
      case WeightKind::monomial: return n == 0 ? c : c * pow(m, static_cast<Real>(rate));
    }
    return c;
  }
};

/// Labels in stream order: Z as 0, 1, -1, 2, -2, ... (|n| <= N); N as first..last.
inline std::vector<long> integer_labels(long N) {
  std::vector<long> out{0};
  for (long n = 1; n <= N; ++n) {
    out.push_back(n);
    out.push_back(-n);
  }
  return out;
}

inline std::vector<long> natural_labels(long first, long last) {
  std::vector<long> out;
  for (long n = first; n <= last; ++n) out.push_back(n);
  return out;
}

namespace detail {

// Position k in stream order satisfies |n| >= k/h and 1+|n| >= (1+k)/h.
template <class Real>
std::pair<Majorant<Real>, Majorant<Real>> law_majorants(const WeightLaw& law, Real h) {
  using M = Majorant<Real>;
  using std::exp;
  using std::pow;
  const Real c = static_cast<Real>(law.scale);
  const Real r = static_cast<Real>(law.rate);
  M weight{};
  switch (law.kind) {
    case WeightKind::constant: weight = M::power(c, 0); break;
    case WeightKind::geometric:
      if (r >= 0 && r <= 1) weight = M::geometric(c, pow(r, 1 / h));
      break;
    case WeightKind::exponential:
      if (law.alpha >= 1 && r > 0) weight = M::geometric(c, exp(-r / h));
      break;
    case WeightKind::power:
    case WeightKind::monomial: {
      Real s = r < 0 ? c * pow(h, -r) : c;
      if (law.kind == WeightKind::monomial && r < 0) s *= pow(Real(2), -r);
      weight = M::power(s, -r);
      break;
    }
  }
  // b/(1+n^2) <= b and b/(1+n^2) <= 2 h^2 b (1+k)^-2
  M decay{};
  if (weight.kind == MajorantKind::geometric)
    decay = weight;
  else if (weight.kind == MajorantKind::power)
    decay = M::power(2 * h * h * weight.scale, weight.rate + 2);
  else if (law.kind == WeightKind::exponential && r >= 0)
    decay = M::power(2 * h * h * c, 2);
  return {weight, decay};
}

}  // namespace detail

/// t_n = n on the given labels with weights from `law`; majorants derived
/// from the law. `truncated` marks the stored section of an infinite set.
template <class Real>
NodeWeightSystem<Real> lattice_system(IndexSet set, long first, long last, const WeightLaw& law, bool truncated = true) {
  NodeWeightSystem<Real> s;
  s.indices = set == IndexSet::integers ? integer_labels(last) : natural_labels(first, last);
  if (set == IndexSet::naturals && first < 0) fail(ErrorCode::DomainError, "natural index set must start at n >= 0");
  for (long n : s.indices) {
    s.nodes.emplace_back(static_cast<Real>(n), Real(0));
    s.weights.push_back(law.template operator()<Real>(n));
  }
  auto [w, d] = detail::law_majorants<Real>(law, set == IndexSet::integers ? Real(2) : Real(1));
  s.weight_majorant = w;
  s.decay_majorant = d;
  s.truncated = truncated;
  s.validate();
  return s;
}

/// t_n = n, |n| <= N, b_n = w(n); majorants supplied by the caller.
template <class Real>
NodeWeightSystem<Real> integer_system(long N, const std::function<Real(long)>& weight, Majorant<Real> decay = {},
                                      Majorant<Real> weight_majorant = {}, bool truncated = true) {
  NodeWeightSystem<Real> s;
  s.indices = integer_labels(N);
  for (long n : s.indices) {
    s.nodes.emplace_back(static_cast<Real>(n), Real(0));
    s.weights.push_back(weight(n));
  }
  s.decay_majorant = decay;
  s.weight_majorant = weight_majorant;
  s.truncated = truncated;
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Admissibility: sum b_n / (1 + |t_n|^2) < inf.

template <class Real>
struct AdmissibilityReport {
  Real partial_sum = 0;
  Real majorant_total = infinity<Real>();
  Real majorant_tail = infinity<Real>();
  bool pass = false;
  Growth growth = Growth::undetermined;   // partial-sum evidence at doubling horizons
  std::vector<std::size_t> horizons;
  std::vector<Real> partial_sums;
  std::string reason;
};

template <class Real>
AdmissibilityReport<Real> check_admissibility(const NodeWeightSystem<Real>& system, std::size_t horizon,
                                              bool strict = false) {
  if (horizon < 1) fail(ErrorCode::DomainError, "horizon must be >= 1");
  const Majorant<Real>& m = system.decay_majorant;
  if (strict && !m.present()) fail(ErrorCode::MajorantMissing, "strict admissibility check needs a decay majorant");

  AdmissibilityReport<Real> r;
  const std::size_t K = std::min(horizon, system.size());
  r.horizons = doubling_horizons(K);
  CompensatedSum<Real> acc;
  std::size_t next = 0;
  bool majorant_violated = false;
  for (std::size_t k = 0; k < K; ++k) {
    const Real term = system.weights[k] / (1 + std::norm(system.nodes[k]));
    acc.add(term);
    if (m.present() && term > m.term(k) * (1 + Real(1e-12))) majorant_violated = true;
    if (next < r.horizons.size() && k + 1 == r.horizons[next]) {
      r.partial_sums.push_back(acc.value());
      ++next;
    }
  }
  r.partial_sum = acc.value();
  r.growth = classify_partial_sums<Real>(r.partial_sums);
  if (m.present()) {
    r.majorant_total = m.tail(0);
    r.majorant_tail = system.truncated || K < system.size() ? m.tail(K) : Real(0);
    if (majorant_violated) {
      r.reason = "declared majorant does not dominate the terms";
    } else if (!m.summable()) {
      r.reason = "majorant is not summable";
    } else {
      r.pass = r.partial_sum <= r.majorant_total * (1 + Real(1e-12));
      r.reason = r.pass ? "partial sums bounded by majorant total" : "partial sum exceeds majorant total";
    }
  } else {
    r.pass = r.growth == Growth::converging;
    r.reason = std::string("no majorant; partial-sum evidence: ") + to_string(r.growth);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Elements.

template <class Real>
struct SpaceElement {
  SystemPtr<Real> system;
  VectorC<Real> coefficients;  // a_n over stored positions; zero beyond storage

  static SpaceElement zero(SystemPtr<Real> s) {
    return {s, VectorC<Real>::Zero(static_cast<Eigen::Index>(s->size()))};
  }
  static SpaceElement coordinate(SystemPtr<Real> s, std::size_t position) {
    SpaceElement e = zero(s);
    e.coefficients(static_cast<Eigen::Index>(position)) = Real(1);
    return e;
  }
};

template <class Real>
bool same_system(const NodeWeightSystem<Real>& a, const NodeWeightSystem<Real>& b) {
  return &a == &b || (a.nodes == b.nodes && a.weights == b.weights);
}

template <class Real>
void require_same_system(const SpaceElement<Real>& f, const SpaceElement<Real>& g) {
  if (!f.system || !g.system || !same_system(*f.system, *g.system))
    fail(ErrorCode::SystemMismatch, "elements belong to different node-weight systems");
}

template <class Real>
SpaceElement<Real> operator+(const SpaceElement<Real>& f, const SpaceElement<Real>& g) {
  require_same_system(f, g);
  return {f.system, f.coefficients + g.coefficients};
}

template <class Real>
SpaceElement<Real> operator*(Complex<Real> s, const SpaceElement<Real>& f) {
  return {f.system, s * f.coefficients};
}

/// Residues a_n b_n^{1/2} of f as a simple-fraction sum.
template <class Real>
std::vector<Complex<Real>> element_residues(const SpaceElement<Real>& f) {
  std::vector<Complex<Real>> d(f.system->size());
  for (std::size_t k = 0; k < d.size(); ++k)
    d[k] = f.coefficients(static_cast<Eigen::Index>(k)) * std::sqrt(f.system->weights[k]);
  return d;
}

template <class Real>
EvalResult<Real> evaluate(const SpaceElement<Real>& f, Complex<Real> z,
                          const TruncationPolicy& policy = TruncationPolicy::all()) {
  const auto d = element_residues(f);
  return sum_simple_fractions<Real>({d, f.system->nodes, {}, true}, z, policy);
}

template <class Real>
Complex<Real> inner_product(const SpaceElement<Real>& f, const SpaceElement<Real>& g) {
  require_same_system(f, g);
  CompensatedSum<Complex<Real>> acc;
  for (Eigen::Index k = 0; k < f.coefficients.size(); ++k) acc.add(f.coefficients(k) * std::conj(g.coefficients(k)));
  return acc.value();
}

template <class Real>
Real norm2(const SpaceElement<Real>& f) {
  return f.coefficients.squaredNorm();
}

/// k_w with coefficients b_n^{1/2} / conj(w - t_n) over the first `terms`
/// stored positions.
template <class Real>
SpaceElement<Real> kernel_at(SystemPtr<Real> system, Complex<Real> w, std::size_t terms = std::size_t(-1)) {
  SpaceElement<Real> k = SpaceElement<Real>::zero(system);
  const std::size_t K = std::min(terms, system->size());
  for (std::size_t j = 0; j < K; ++j) {
    const Complex<Real> t = system->nodes[j];
    if (coincides(w, t)) fail(ErrorCode::PoleHit, "kernel point coincides with node " + std::to_string(system->indices[j]));
    k.coefficients(static_cast<Eigen::Index>(j)) = std::sqrt(system->weights[j]) / std::conj(w - t);
  }
  return k;
}

/// Bound on sum_{k >= start} b_k / |w - t_k|^2 (the squared norm of the
/// kernel coefficients omitted past `start`, including nodes beyond storage
/// when the system is truncated). Past positions with |t| >= 2|w| + 1,
/// |w - t|^2 >= (1 + |t|^2)/8, so the decay majorant controls the rest.
template <class Real>
Real kernel_tail_norm2(const NodeWeightSystem<Real>& system, Complex<Real> w, std::size_t start) {
  using std::abs;
  const std::size_t n = system.size();
  Real stored = 0;
  for (std::size_t k = start; k < n; ++k) stored += system.weights[k] / std::norm(w - system.nodes[k]);
  if (!system.truncated) return stored;
  const Majorant<Real>& m = system.decay_majorant;
  if (!m.summable() || n == 0) return infinity<Real>();
  if (!(abs(system.nodes[n - 1]) >= 2 * abs(w) + 1)) return infinity<Real>();
  return stored + 8 * m.tail(n);
}

template <class Real>
Complex<Real> node_value(const SpaceElement<Real>& f, std::size_t position) {
  return f.coefficients(static_cast<Eigen::Index>(position)) * std::sqrt(f.system->weights[position]);
}

/// b_n^{1/2} e_n: pairing against it returns node_value.
template <class Real>
SpaceElement<Real> node_kernel(SystemPtr<Real> system, std::size_t position) {
  SpaceElement<Real> e = SpaceElement<Real>::coordinate(system, position);
  e.coefficients *= std::sqrt(system->weights[position]);
  return e;
}

// ---------------------------------------------------------------------------
// Finite-section Riesz/frame diagnostics.

template <class Real>
struct GramSpectrum {
  Real lower = 0;
  Real upper = 0;
  bool degenerate = false;
};

/// Extreme eigenvalues of the Gram matrix of the normalized family.
template <class Real>
GramSpectrum<Real> gram_spectrum(const std::vector<SpaceElement<Real>>& family) {
  const auto m = static_cast<Eigen::Index>(family.size());
  if (m == 0) fail(ErrorCode::DomainError, "empty family");
  MatrixC<Real> V(family.front().coefficients.size(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& f = family[static_cast<std::size_t>(j)];
    require_same_system(family.front(), f);
    const Real nf = f.coefficients.norm();
    if (!(nf > 0)) fail(ErrorCode::DegenerateGram, "family contains a zero vector");
    V.col(j) = f.coefficients / nf;
  }
  const MatrixC<Real> G = V.adjoint() * V;
  Eigen::SelfAdjointEigenSolver<MatrixC<Real>> eig(G, Eigen::EigenvaluesOnly);
  GramSpectrum<Real> s;
  s.lower = eig.eigenvalues().minCoeff();
  s.upper = eig.eigenvalues().maxCoeff();
  s.degenerate = s.lower < Real(1e-14);
  return s;
}

template <class Real>
GramSpectrum<Real> gram_bounds(const std::vector<SpaceElement<Real>>& family) {
  auto s = gram_spectrum(family);
  if (s.degenerate)
    fail(ErrorCode::DegenerateGram, "smallest Gram eigenvalue " + std::to_string(static_cast<double>(s.lower)) +
                                        " below 1e-14");
  return s;
}

template <class Real>
struct FrameBounds {
  Real lower = 0;
  Real upper = 0;
  Real max_relative_tail = 0;  // max_j kernel tail norm^2 / ||k_{w_j}||^2
};

/// Riesz bounds estimate of the normalized kernels at `points`, each kernel
/// truncated to policy.max_terms stored positions.
template <class Real>
FrameBounds<Real> frame_bounds(SystemPtr<Real> system, const std::vector<Complex<Real>>& points,
                               const TruncationPolicy& policy = TruncationPolicy::all()) {
  policy.validate();
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (points[i] == points[j]) fail(ErrorCode::DomainError, "frame points must be pairwise distinct");
  std::vector<SpaceElement<Real>> kernels;
  FrameBounds<Real> out;
  const std::size_t K = std::min(policy.max_terms, system->size());
  for (const auto& w : points) {
    kernels.push_back(kernel_at(system, w, K));
    const Real tail = kernel_tail_norm2(*system, w, K);
    out.max_relative_tail = std::max(out.max_relative_tail, tail / norm2(kernels.back()));
  }
  auto s = gram_bounds(kernels);
  out.lower = s.lower;
  out.upper = s.upper;
  return out;
}

}  // namespace rklab
