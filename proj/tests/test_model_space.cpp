#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rklab/density.hpp"
#include "rklab/witness.hpp"

using namespace rklab;
using C = std::complex<double>;
using CL = std::complex<long double>;
constexpr double pi = std::numbers::pi;

namespace {

InnerFunctionSpec<double> random_blaschke(int d, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> x(-5, 5), y(0.2, 3);
  std::vector<C> z;
  for (int k = 0; k < d; ++k) z.emplace_back(x(rng), y(rng));
  return finite_blaschke(z);
}

InnerFunctionSpec<double> degree3() { return finite_blaschke<double>({C(1, 1), C(-2, 0.5), C(0.3, 2)}); }

InnerFunctionSpec<double> dyadic_imaginary(int K) {
  std::vector<C> z;
  for (int k = 1; k <= K; ++k) z.emplace_back(0, std::ldexp(1.0, -k));
  return finite_blaschke(z);
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::DomainError;
}

}  // namespace

TEST_CASE("Blaschke evaluation") {
  auto B = finite_blaschke<double>({C(0, 1)});
  CHECK(std::abs(blaschke_eval(B, C(0, 1))) == 0);
  CHECK(std::abs(blaschke_eval(B, C(0, 2)) - 1.0 / 3) < 1e-15);
  CHECK(code_of([&] { blaschke_eval(B, C(0, -1)); }) == ErrorCode::PoleHit);

  auto R = random_blaschke(10, 7);
  InnerFunctionSpec<long double> RL;
  for (auto z : R.zeros) RL.zeros.emplace_back(z.real(), z.imag());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-8, 8), v(0.01, 8);
  for (int i = 0; i < 50; ++i) {
    const double t = u(rng);
    CHECK(std::abs(std::abs(blaschke_eval(R, C(t))) - 1) <= 1e-12);
    const C z(u(rng), v(rng));
    const C b = blaschke_eval(R, z);
    CHECK(std::abs(b) < 1);
    CL ref = 1;
    for (const auto& zn : RL.zeros) ref *= (CL(z) - zn) / (CL(z) - std::conj(zn));
    CHECK(std::abs(CL(b) - ref) <= 1e-10L);
  }
}

TEST_CASE("Caratheodory points") {
  InnerFunctionSpec<double> fast, slow;
  fast.infinite = slow.infinite = true;
  for (int n = 1; n <= 4096; ++n) {
    fast.zeros.emplace_back(n, 1.0 / (double(n) * n));
    slow.zeros.emplace_back(n, 1.0 / n);
  }
  fast.height_majorant = Majorant<double>::power(1, 2);
  auto a = caratheodory_test(fast, std::nullopt);
  CHECK(a.is_caratheodory);
  CHECK(a.value == doctest::Approx(pi * pi / 6).epsilon(1e-3));
  CHECK_FALSE(caratheodory_test(slow, std::nullopt).is_caratheodory);
  CHECK(code_of([&] { angular_q(slow, std::vector<double>{1e3}); }) == ErrorCode::NotCaratheodoryAtInfinity);

  auto R = degree3();
  auto c = caratheodory_test(R, std::optional<double>(0.5));
  CHECK(c.is_caratheodory);
  double ref = 0;
  for (auto z : R.zeros) ref += z.imag() / std::norm(C(0.5) - z);
  CHECK(c.value == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("angular derivative at infinity") {
  auto one = angular_q(finite_blaschke<double>({C(0, 1)}), {1.0, 10.0, 1e3, 1e5});
  CHECK(one.q == 2);
  CHECK(one.p == 1);
  for (std::size_t i = 0; i < one.ys.size(); ++i) {
    const double y = one.ys[i];
    CHECK(std::abs(one.values[i] - 2 * y / (y + 1)) <= 1e-12);
  }
  CHECK(one.deviation <= 1e-4);

  auto ten = angular_q(dyadic_imaginary(10), {1e1, 1e2, 1e3, 1e4, 1e5});
  CHECK(ten.q == doctest::Approx(2 * (1 - std::ldexp(1.0, -10))).epsilon(1e-15));
  CHECK(ten.deviation <= 1e-3);
  CHECK(ten.monotone);
}

TEST_CASE("Frostman shifts") {
  auto R = degree3();
  auto id = frostman_shift(R, C(0));
  for (C z : {C(0.3, 0.2), C(-4, 1)}) CHECK(std::abs(evaluate(id, z) - blaschke_eval(R, z)) <= 1e-15);
  const C gamma(0.3, -0.2);
  auto s = frostman_shift(R, gamma);
  for (double t = -20; t <= 20; t += 0.37) CHECK(std::abs(std::abs(evaluate(s, C(t))) - 1) <= 1e-12);
  auto lvl = solve_level(R, gamma, -5.0, 5.0, 5.0);
  CHECK(lvl.z.imag() > 0);
  CHECK(std::abs(blaschke_eval(R, lvl.z) - gamma) <= 1e-12);
  CHECK(std::abs(evaluate(s, lvl.z)) <= 1e-10);
  CHECK(code_of([&] { frostman_shift(R, C(1, 0)); }) == ErrorCode::DomainError);
}

TEST_CASE("Clark measures") {
  auto B1 = finite_blaschke<double>({C(0, 1)});
  auto c = clark_measure(B1, C(-1));
  REQUIRE(c.atoms.size() == 1);
  CHECK(std::abs(c.atoms[0]) <= 1e-12);
  CHECK(c.masses[0] == doctest::Approx(pi).epsilon(1e-12));
  CHECK(c.p_alpha == 0);
  auto at1 = clark_measure(B1, C(1));
  CHECK(at1.atoms.empty());
  CHECK(at1.p_alpha > 0);
  CHECK(code_of([&] { clark_transform<double>({}, at1, B1, C(0, 1)); }) == ErrorCode::MassAtInfinity);

  auto R = degree3();
  auto c3 = clark_measure(R, C(-1));
  REQUIRE(c3.atoms.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(blaschke_eval(R, C(c3.atoms[j])) + 1.0) <= 1e-12);
    CHECK(boundary_phase(R, c3.atoms[j]) == doctest::Approx(pi + 2 * pi * j).epsilon(1e-12));
    if (j > 0) CHECK(c3.atoms[j] > c3.atoms[j - 1]);
    // mass from a centered difference of the phase
    const double h = 1e-5;
    const double d = (boundary_phase(R, c3.atoms[j] + h) - boundary_phase(R, c3.atoms[j] - h)) / (2 * h);
    CHECK(c3.masses[j] == doctest::Approx(2 * pi / d).epsilon(1e-8));
  }
  InnerFunctionSpec<double> inf = R;
  inf.infinite = true;
  CHECK(code_of([&] { clark_measure(inf, C(-1)); }) == ErrorCode::DegreeUnknown);
}

TEST_CASE("Clark unitarity by exact rational inner products") {
  for (int d : {1, 3, 8}) {
    auto B = d == 1 ? finite_blaschke<double>({C(0.4, 1.3)}) : random_blaschke(d, 100 + d);
    auto data = clark_measure(B, C(-1));
    REQUIRE(data.atoms.size() == std::size_t(d));
    std::vector<RationalH2<double>> k;
    for (int j = 0; j < d; ++j) k.push_back(clark_kernel_rational(B, data, j));
    double worst = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const C g = h2_inner(k[i], k[j]);
        worst = std::max(worst, std::abs(g - (i == j ? C(data.masses[i]) : C(0))));
      }
    CHECK(worst <= 1e-9);
    // partial fractions agree with the transform formula
    for (C z : {C(0.1, 0.7), C(-3, 2), C(7, 0.1)})
      for (int j = 0; j < d; ++j) {
        std::vector<C> e(std::size_t(d), C(0));
        e[std::size_t(j)] = 1;
        CHECK(std::abs(k[j](z) - clark_transform(e, data, B, z)) <= 1e-12 * (1 + std::abs(k[j](z))));
      }
  }
  auto R = degree3();
  auto data = clark_measure(R, C(-1));
  std::mt19937 rng(9);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<C> g;
    RationalH2<double> f;
    double expect = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      g.emplace_back(n01(rng), n01(rng));
      f = f + g.back() * clark_kernel_rational(R, data, j);
      expect += std::norm(g.back()) * data.masses[j];
    }
    CHECK(std::abs(h2_inner(f, f) - C(expect)) <= 1e-9);
  }
  CHECK(clark_transform(std::vector<C>(3, C(0)), data, R, C(1, 1)) == C(0));
}

TEST_CASE("K_Theta kernels") {
  auto R = degree3();
  const C lam0 = R.zeros[0];
  for (C z : {C(0, 1), C(2, 3)}) CHECK(std::abs(ktheta_kernel(R, lam0, z) - C(0, 1) / (2 * pi * (z - std::conj(lam0)))) <= 1e-15);
  const C lam(0.7, 0.9);
  const double th = std::abs(blaschke_eval(R, lam));
  CHECK(ktheta_kernel(R, lam, lam).real() == doctest::Approx((1 - th * th) / (4 * pi * lam.imag())).epsilon(1e-12));
  CHECK(std::abs(ktheta_kernel(R, lam, lam).imag()) <= 1e-15);
  CHECK(code_of([&] { ktheta_kernel(R, lam, std::conj(lam)); }) == ErrorCode::PoleHit);

  // reproducing property on f = C g
  auto data = clark_measure(R, C(-1));
  auto k = ktheta_kernel_rational(R, lam);
  for (C z : {C(0.2, 0.5), C(4, 1)}) CHECK(std::abs(k(z) - ktheta_kernel(R, lam, z)) <= 1e-12);
  const std::vector<C> g{C(1, 2), C(-0.5, 0), C(0.3, -1)};
  RationalH2<double> f;
  for (std::size_t j = 0; j < 3; ++j) f = f + g[j] * clark_kernel_rational(R, data, j);
  CHECK(std::abs(h2_inner(f, k) - clark_transform(g, data, R, lam)) <= 1e-9);
}

TEST_CASE("witness, first case") {
  std::vector<C> z;
  for (int k = 1; k <= 10; ++k) z.emplace_back(0.5 * k - 2.5, 0.1 * k);
  auto B = finite_blaschke(z);
  auto [f, rep] = build_witness_case1(B);
  CHECK(rep.conditions.size() == 3);
  for (const auto& c : rep.conditions) CHECK(c.pass);
  CHECK(rep.y_times_f.back() <= 1e-3);
  CHECK(rep.grid_C > 0);
  CHECK(rep.analytic_C > 0);
  CHECK(rep.grid_C >= rep.analytic_C * (1 - 1e-9));
  // orthogonality to 1 - B: y f(iy) -> 0, oracle from the closed form at the origin-symmetric point
  const double y = 1e5;
  const C direct = C(1) - blaschke_eval(B, C(0, y)) - C(0, f.q) / (C(0, y) - std::conj(z[0]));
  CHECK(std::abs(direct - f(C(0, y))) <= 1e-15);

  CHECK(code_of([] { build_witness_case1(finite_blaschke<double>({C(0, 1)})); }) == ErrorCode::ConditionViolated);
}

TEST_CASE("witness, second case") {
  InnerFunctionSpec<double> B;
  const int N = 20;
  for (int n = 1; n <= N; ++n) B.zeros.emplace_back(10 * std::pow(3.0, n), std::pow(4.0, -n));
  B.infinite = true;
  B.omitted_height = std::pow(4.0, -N) / 3;
  B.height_majorant = Majorant<double>::geometric(0.25, 0.25);
  WitnessOptions o;
  o.coefficient_tail = std::ldexp(1.0, -N);
  o.ys = {1e2, 1e5, 1e8, 1e11, 1e14};  // past the largest x_n
  auto [f, rep] = build_witness_case2(B, o);
  CHECK(f.q == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(rep.n0 == 2);  // n = 3: 2/3 > 4 2^-n first holds at n = 3
  for (const auto& c : rep.conditions) CHECK(c.pass);
  for (std::size_t i = 0; i < rep.predicted.size(); ++i) {
    CHECK(rep.predicted[i] > 2);
    CHECK(std::abs(rep.re_f_at_zeros[i] - rep.predicted[i]) <= 2);
  }
  CHECK(rep.y_times_f.back() <= 1e-3);

  WitnessOptions bad = o;
  bad.coefficients.assign(N, 2.0);
  CHECK(code_of([&] { build_witness_case2(B, bad); }) == ErrorCode::ConditionViolated);
}

TEST_CASE("tempered phase derivatives") {
  InnerFunctionSpec<double> E;
  E.exp_factor = 2 * pi;
  std::vector<double> t, d;
  for (int n = -50; n <= 50; ++n) {
    t.push_back(n);
    d.push_back(half_phase_derivative(E, double(n)));
  }
  for (double v : d) CHECK(v == doctest::Approx(pi).epsilon(1e-15));
  auto r = tempered_check(t, d, 0.0, pi);
  CHECK(r.pass);
  for (double b : r.induced.weights) CHECK(b == doctest::Approx(1 / (pi * pi)).epsilon(1e-15));

  std::vector<double> tn, sq;
  for (int n = 1; n <= 1000; ++n) {
    tn.push_back(n);
    sq.push_back(double(n) * n);
  }
  auto two = tempered_check(tn, sq, 2.0, 1.0);
  CHECK(two.pass);
  CHECK_FALSE(tempered_check(tn, sq, 1.0, 1.0).pass);
  CHECK(power_decay_check(two.induced, 2).pass);
}
