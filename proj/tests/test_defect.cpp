#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rklab/defect.hpp"

using namespace rklab;
using C = std::complex<double>;

namespace {

// t_n = n, |n| <= 200, b_n = 4^-|n|, d_n = 2^-|n|; finite (not truncated).
GeneratingRatio<double> dyadic_ratio() {
  auto sys = share(lattice_system<double>(IndexSet::integers, 0, 200, {WeightKind::geometric, 1.0, 0.25}, false));
  GeneratingRatio<double> g{sys, {}};
  for (long n : sys->indices) g.residues.emplace_back(std::ldexp(1.0, -int(std::abs(n))));
  return g;
}

GeneratingRatio<double> pw_ratio() {
  auto sys = share(lattice_system<double>(IndexSet::integers, 0, 2000, {WeightKind::constant, 1.0}, false));
  return {sys, std::vector<C>(sys->size(), C(1))};
}

RealZeroProduct<double> half_integer_squares(int J) {
  RealZeroProduct<double> p;
  p.base.push_back(0.5);
  for (int j = 2; j <= J; ++j) p.base.push_back(double(j) * j + 0.5);
  return p;
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(std::pow(10.0, a + (b - a) * i / (n - 1)));
  return v;
}

}  // namespace

TEST_CASE("membership: S = 1 converges with exact identity; S = z diverges on PW") {
  auto g = dyadic_ratio();
  auto one = CandidateS<double>::constant(1.0);
  auto rep = s_membership_report(g, one);
  CHECK(rep.pass);
  CHECK(rep.growth == Growth::converging);
  CHECK(rep.max_identity_residual <= 1e-8);

  auto z = CandidateS<double>::polynomial({0.0, 1.0});
  auto pw = s_membership_report(pw_ratio(), z);
  CHECK_FALSE(pw.pass);
  CHECK(pw.growth == Growth::diverging);
  CHECK_THROWS_AS(defect_element(pw_ratio(), z), Error);
}

TEST_CASE("defect elements") {
  auto g = dyadic_ratio();
  auto h = defect_element(g, CandidateS<double>::constant(1.0));
  for (std::size_t k = 0; k < g.system->size(); ++k)
    CHECK(h.coefficients(Eigen::Index(k)) == C(std::sqrt(g.system->weights[k])));
  auto zero = defect_element(g, CandidateS<double>::constant(0.0));
  CHECK(norm2(zero) == 0);

  auto S = CandidateS<double>::polynomial({1.0, 0.0, 2.0});
  auto hs = defect_element(g, S);
  auto rep = s_membership_report(g, S);
  CHECK(norm2(hs) == doctest::Approx(rep.norm2).epsilon(1e-12));
}

TEST_CASE("orthogonality residual") {
  auto g = dyadic_ratio();
  auto zs = zeros(g, -10.0, 10.0);
  REQUIRE(zs.size() == 20);
  auto h = defect_element(g, CandidateS<double>::constant(1.0));
  auto rep = orthogonality_residual(h, g, zs);
  CHECK(rep.tail_bound == 0);
  // oracle: pairing equals -G/F(lambda) for S = 1
  for (std::size_t j = 0; j < zs.size(); ++j) {
    const double scale = biorthogonal_coeffs(g, C(zs[j])).scale;
    CHECK(std::abs(rep.pairings[j] + ratio_eval(g, C(zs[j])).value) <= 1e-12 * scale);
    CHECK(std::abs(rep.pairings[j]) <= 1e-10 * scale);
  }
  auto e = biorthogonal_coeffs(g, C(zs[3]));
  auto self = orthogonality_residual(e.element, g, {zs[3]});
  CHECK(self.max_residual > 0);
  CHECK(self.max_residual == doctest::Approx(norm2(e.element)).epsilon(1e-12));
  CHECK(orthogonality_residual(SpaceElement<double>::zero(g.system), g, zs).max_residual == 0);
}

TEST_CASE("difference quotients: polynomial closed forms") {
  auto q = difference_quotient(CandidateS<double>::polynomial({0.0, 0.0, 1.0}), C(1));
  REQUIRE(q.is_polynomial());
  const auto& c = std::get<Polynomial<double>>(q.form).coefficients;
  REQUIRE(c.size() == 2);
  CHECK(c[0] == C(1));
  CHECK(c[1] == C(1));
  auto k = difference_quotient(CandidateS<double>::constant(3.0), C(2, 1));
  CHECK(evaluate(k, C(5, 5)).value == C(0));
}

TEST_CASE("difference quotients: product form, two-point and Taylor branches") {
  auto S = CandidateS<double>::product(half_integer_squares(30));
  const C w(2.0, 0.7);
  auto q = difference_quotient(S, w);
  const C Sw = evaluate(S, w).value;
  for (C z : {C(0, 1), C(3.3, -1), C(7.1)}) {
    const C direct = (evaluate(S, z).value - Sw) / (z - w);
    CHECK(std::abs(evaluate(q, z).value - direct) <= 1e-12 * (1 + std::abs(direct)));
  }
  // S'(w) from the logarithmic derivative
  C logd = 0;
  for (double t : std::get<RealZeroProduct<double>>(S.form).base) logd += -2.0 * w / (t * t - w * w);
  const C deriv = Sw * logd;
  auto at = evaluate(q, w);
  CHECK(std::abs(at.value - deriv) <= 1e-9 * std::abs(deriv));
  // continuity across the fallback radius
  auto inside = evaluate(q, w + C(5e-7, 0)).value;
  auto outside = evaluate(q, w + C(2e-6, 0)).value;
  CHECK(std::abs(inside - outside) <= 1e-5 * std::abs(deriv));
}

TEST_CASE("closure: difference quotients of members stay members") {
  auto g = dyadic_ratio();
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (auto S : {CandidateS<double>::constant(1.0), CandidateS<double>::polynomial({1.0, -2.0, 0.5, 1.0}),
                 CandidateS<double>::product(half_integer_squares(6))}) {
    auto base = s_membership_report(g, S);
    REQUIRE(base.pass);
    for (int i = 0; i < 5; ++i) {
      const C w(u(rng), u(rng));
      CHECK(s_membership_report(g, difference_quotient(S, w)).pass);
    }
  }
}

TEST_CASE("size profiles") {
  auto ys = logspace(2, 6, 21);
  auto one = size_profile(CandidateS<double>::constant(1.0), ys, std::function<double(double)>([](double) { return 1.0; }));
  for (const auto& r : one.rows) CHECK(r.log_s == 0);
  CHECK_FALSE(one.achieves);

  auto cube = CandidateS<double>::polynomial({1.0, 0.0, 0.0, 1.0});
  auto p = size_profile(cube, ys, std::function<double(double)>([](double y) { return 3 * std::log(y); }), 0.99);
  CHECK(p.achieves);
  CHECK(std::abs(p.rows.back().ratio - 1) < 1e-6);
}

TEST_CASE("exponential type estimates") {
  auto ys = logspace(2, 6, 41);
  auto poly = exp_type_estimate(CandidateS<double>::polynomial({1.0, 2.0, 0.0, 0.0, 1.0}), ys);
  CHECK(std::abs(poly.slope) <= 1e-3);

  RealZeroProduct<double> sine;
  for (int k = 1; k <= 100000; ++k) sine.base.push_back(k);
  sine.exhaustive = false;
  sine.inverse_square_majorant = Majorant<double>::power(1.0, 2.0);
  auto s = exp_type_estimate(CandidateS<double>::product(sine), logspace(0, 2, 41));
  CHECK(std::abs(s.slope - std::numbers::pi) <= 0.01 * std::numbers::pi);
  CHECK_THROWS_AS(exp_type_estimate(CandidateS<double>::constant(1.0), logspace(0, 1, 5)), Error);
}

TEST_CASE("size integral identity against the product") {
  auto p = half_integer_squares(1000);
  auto S = CandidateS<double>::product(p);
  for (double y : {10.0, 1e3, 1e5, 1e6}) {
    const double direct = log_abs(S, C(0, y));
    const double quad = size_integral(p.base, y);
    CHECK(std::abs(quad - direct) <= 1e-6 * direct);
  }
}
