#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rklab/space.hpp"

using namespace rklab;
using C = std::complex<double>;

namespace {

SystemPtr<double> pw(long N) {
  return share(lattice_system<double>(IndexSet::integers, 0, N, {WeightKind::constant, 1.0}));
}

SystemPtr<double> tiny(std::vector<double> t, std::vector<double> b) {
  NodeWeightSystem<double> s;
  for (std::size_t k = 0; k < t.size(); ++k) {
    s.indices.push_back(long(k));
    s.nodes.emplace_back(t[k]);
  }
  s.weights = b;
  return share(s);
}

SpaceElement<double> random_element(SystemPtr<double> s, std::mt19937& rng, int support) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::size_t> pick(0, s->size() - 1);
  auto f = SpaceElement<double>::zero(s);
  for (int j = 0; j < support; ++j) f.coefficients(Eigen::Index(pick(rng))) = C(g(rng), g(rng));
  return f;
}

// Closed form for t_n = n, b_n = 1 over all of Z.
C pw_gram(C w, C v) { return std::numbers::pi * (1.0 / std::tan(std::numbers::pi * std::conj(w)) - 1.0 / std::tan(std::numbers::pi * v)) / (v - std::conj(w)); }

}  // namespace

TEST_CASE("admissibility verdicts") {
  auto p = check_admissibility(*pw(1000), 2001);
  CHECK(p.pass);
  CHECK(p.partial_sum <= p.majorant_total);

  auto sq = lattice_system<double>(IndexSet::integers, 0, 1000, {WeightKind::monomial, 1.0, 2.0});
  auto f = check_admissibility(sq, 2001);
  CHECK_FALSE(f.pass);

  auto g = lattice_system<double>(IndexSet::integers, 0, 1000, {WeightKind::geometric, 1.0, 0.5});
  CHECK(check_admissibility(g, 2001).pass);

  // no majorant: strict mode refuses, evidence mode classifies growth
  auto bare = sq;
  bare.decay_majorant = {};
  CHECK_THROWS_AS(check_admissibility(bare, 2001, true), Error);
  auto ev = check_admissibility(bare, 2001);
  CHECK_FALSE(ev.pass);
  CHECK(ev.growth == Growth::diverging);

  // a lying majorant is caught
  auto liar = *pw(100);
  liar.decay_majorant = Majorant<double>::geometric(1.0, 0.5);
  CHECK_FALSE(check_admissibility(liar, 201).pass);
  CHECK_THROWS_AS(check_admissibility(liar, 0), Error);
}

TEST_CASE("stream order and derived majorants dominate") {
  auto labels = integer_labels(2);
  CHECK(labels == std::vector<long>{0, 1, -1, 2, -2});
  for (auto law : {WeightLaw{WeightKind::geometric, 1.0, 0.25}, WeightLaw{WeightKind::power, 2.0, -3.0},
                   WeightLaw{WeightKind::monomial, 1.0, -2.0}, WeightLaw{WeightKind::exponential, 1.0, 1.0, 0.25},
                   WeightLaw{WeightKind::exponential, 1.0, 1.0, 1.0}}) {
    for (auto set : {IndexSet::integers, IndexSet::naturals}) {
      auto s = lattice_system<double>(set, 1, 300, law);
      for (std::size_t k = 0; k < s.size(); ++k) {
        const double t = s.nodes[k].real();
        CHECK(s.weights[k] / (1 + t * t) <= s.decay_majorant.term(k) * (1 + 1e-12));
        if (s.weight_majorant.present()) CHECK(s.weights[k] <= s.weight_majorant.term(k) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("evaluate: closed forms and truncation agreement") {
  auto s = tiny({0.0}, {4.0});
  SpaceElement<double> f{s, VectorC<double>::Constant(1, C(1))};
  CHECK(std::abs(evaluate(f, C(2)).value - C(1)) < 1e-15);

  auto sys = pw(500);
  auto zero = SpaceElement<double>::zero(sys);
  CHECK(evaluate(zero, C(0.3, 2)).value == C(0));

  std::mt19937 rng(11);
  auto r = random_element(sys, rng, 40);
  auto short_eval = evaluate(r, C(1, 1), TruncationPolicy::fixed(100));
  auto long_eval = evaluate(r, C(1, 1), TruncationPolicy::fixed(1000));
  CHECK(std::abs(short_eval.value - long_eval.value) <= short_eval.tail_bound + long_eval.rounding_bound);

  CHECK_THROWS_AS(evaluate(r, C(3)), Error);
}

TEST_CASE("inner products") {
  auto sys = pw(10);
  for (std::size_t n = 0; n < 4; ++n)
    for (std::size_t m = 0; m < 4; ++m) {
      auto v = inner_product(SpaceElement<double>::coordinate(sys, n), SpaceElement<double>::coordinate(sys, m));
      CHECK(v == C(n == m ? 1.0 : 0.0));
    }
  auto two = tiny({0.0, 1.0}, {1.0, 1.0});
  SpaceElement<double> f{two, VectorC<double>(2)};
  f.coefficients << 3.0, 4.0;
  CHECK(inner_product(f, f) == C(25));

  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_element(sys, rng, 5), b = random_element(sys, rng, 5);
    CHECK(std::abs(inner_product(a, b)) <= std::sqrt(norm2(a) * norm2(b)) * (1 + 1e-14));
  }
  CHECK_THROWS_AS(inner_product(f, SpaceElement<double>::zero(sys)), Error);
}

TEST_CASE("kernels: closed form, reproducing identity, positivity, symmetry") {
  auto one = tiny({0.0}, {1.0});
  auto k = kernel_at(one, C(0, 1));
  CHECK(std::abs(k.coefficients(0) - C(0, 1)) < 1e-15);

  auto sys = pw(500);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-5, 5), y(0.1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_element(sys, rng, 20);
    const C w(u(rng), y(rng));
    auto kw = kernel_at(sys, w);
    auto e = evaluate(f, w);
    CHECK(std::abs(inner_product(f, kw) - e.value) <= e.tail_bound + e.rounding_bound + 1e-13);
    const C diag = evaluate(kw, w).value;
    CHECK(diag.real() > 0);
    CHECK(std::abs(diag.real() - norm2(kw)) < 1e-12 * norm2(kw));
    const C v(u(rng), y(rng));
    CHECK(std::abs(evaluate(kw, v).value - std::conj(evaluate(kernel_at(sys, v), w).value)) < 1e-12);
  }
  CHECK_THROWS_AS(kernel_at(sys, C(2)), Error);
}

TEST_CASE("kernel tail bound is honest against the closed-form diagonal") {
  auto sys = pw(2000);
  const C w(0.5, 1.0);
  auto kw = kernel_at(sys, w);
  const double full = pw_gram(w, w).real();
  const double tail = kernel_tail_norm2(*sys, w, sys->size());
  CHECK(std::isfinite(tail));
  CHECK(full - norm2(kw) >= 0);
  CHECK(full - norm2(kw) <= tail);
}

TEST_CASE("node values: coordinates, linearity, Parseval, residue limit") {
  auto sys = share(lattice_system<double>(IndexSet::integers, 0, 50, {WeightKind::geometric, 1.0, 0.5}));
  auto e3 = SpaceElement<double>::coordinate(sys, 3);
  for (std::size_t n = 0; n < sys->size(); ++n)
    CHECK(node_value(e3, n) == C(n == 3 ? std::sqrt(sys->weights[3]) : 0.0));

  std::mt19937 rng(9);
  auto f = random_element(sys, rng, 10), g = random_element(sys, rng, 10);
  const C s(0.3, -1.2);
  for (std::size_t n = 0; n < sys->size(); ++n) {
    CHECK(std::abs(node_value(f + s * g, n) - (node_value(f, n) + s * node_value(g, n))) < 1e-14);
    CHECK(std::abs(inner_product(f, node_kernel(sys, n)) - node_value(f, n)) < 1e-15);
  }
  double parseval = 0;
  for (std::size_t n = 0; n < sys->size(); ++n) parseval += std::norm(node_value(f, n)) / sys->weights[n];
  CHECK(parseval == doctest::Approx(norm2(f)).epsilon(1e-13));

  const std::size_t n = 1;  // t = 1
  const double t = sys->nodes[n].real();
  auto g1 = evaluate(f, C(t + 1e-6)).value * 1e-6;
  auto g2 = evaluate(f, C(t + 1e-8)).value * 1e-8;
  const C richardson = (1e-6 * g2 - 1e-8 * g1) / (1e-6 - 1e-8);
  CHECK(std::abs(richardson - node_value(f, n)) < 1e-9 * std::max(1.0, std::abs(node_value(f, n))));
}

TEST_CASE("frame bounds") {
  auto sys = pw(40);
  std::vector<SpaceElement<double>> coords;
  for (std::size_t n = 0; n < 6; ++n) coords.push_back(node_kernel(sys, n));
  auto b = gram_bounds(coords);
  CHECK(b.lower == doctest::Approx(1.0));
  CHECK(b.upper == doctest::Approx(1.0));

  try {
    frame_bounds(sys, {C(0.5, 1), C(0.5 + 1e-9, 1)});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGram);
  }
  auto near = gram_spectrum(std::vector{kernel_at(sys, C(0.5, 1)), kernel_at(sys, C(0.5 + 1e-9, 1))});
  CHECK(near.degenerate);
  CHECK(near.lower <= near.upper);
}

TEST_CASE("frame bounds for 20 kernels at j + i against the closed-form Gram") {
  std::vector<C> pts;
  for (int j = 1; j <= 20; ++j) pts.emplace_back(j, 1.0);
  Eigen::MatrixXcd G(20, 20);
  for (int a = 0; a < 20; ++a)
    for (int b = 0; b < 20; ++b)
      G(a, b) = pw_gram(pts[b], pts[a]) / std::sqrt(pw_gram(pts[a], pts[a]).real() * pw_gram(pts[b], pts[b]).real());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G);
  const double A = eig.eigenvalues().minCoeff(), B = eig.eigenvalues().maxCoeff();

  double previous_gap = 1;
  for (long N : {2000L, 20000L, 200000L}) {
    auto fb = frame_bounds(pw(N), pts);
    CHECK(fb.lower <= fb.upper);
    CHECK(fb.lower > 0);
    // normalized entries move by at most ~3 sqrt(relative tail); Weyl over 20x20
    const double allowed = 60 * std::sqrt(fb.max_relative_tail);
    const double gap = std::max(std::abs(fb.lower - A), std::abs(fb.upper - B));
    CHECK(gap <= allowed);
    CHECK(gap <= previous_gap);
    previous_gap = gap;
  }
  CHECK(previous_gap < 1e-4);
}
