#include <cstdio>

#include "cli.hpp"
#include "rklab/constructions.hpp"
#include "rklab/model_space.hpp"

namespace rklab::cli {

namespace {

struct Bundle {
  std::filesystem::path dir;
  Json recipe;

  Json load(const std::string& file) const { return io::load_json(dir / file); }
};

template <class Real>
GeneratingRatio<Real> load_ratio(const Bundle& b) {
  auto sys = share(io::system_from_json<Real>(b.load("system.json")));
  return io::ratio_from_json<Real>(b.load("ratio.json"), sys);
}

template <class Real>
Json verify_thm1(const Context& ctx, const Bundle& b) {
  const auto g = load_ratio<Real>(b);
  const auto zeros = io::vector_of<Real>(b.recipe, "zeros");
  auto h = SpaceElement<Real>::zero(g.system);
  const Json& d = io::require(b.recipe, "defect");
  if (!d.is_array() || d.size() != g.system->size()) throw io::IoError("key 'defect': expected one coefficient per node");
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto c = io::complex_from_json(d[k], "defect");
    h.coefficients(static_cast<Eigen::Index>(k)) = Complex<Real>(static_cast<Real>(c.real()), static_cast<Real>(c.imag()));
  }
  Json checks = Json::array();
  const auto orth = orthogonality_residual(h, g, zeros, Real(1));
  const Real o = orth.max_residual + orth.tail_bound;
  checks.push_back(check("orthogonality_residual", "defect", o, ctx.tolerance("orthogonality"), o <= ctx.tolerance("orthogonality")));
  const auto kr = kronecker_residuals(g, zeros);
  const Real kmax = std::max(kr.max_off_diagonal, kr.max_diagonal_error);
  checks.push_back(check("kronecker_residual", "generating", kmax, ctx.tolerance("kronecker"), kmax <= ctx.tolerance("kronecker")));
  return checks;
}

template <class Real>
Json verify_example13(const Context& ctx, const Bundle& b) {
  Example13Bundle<Real> E;
  E.depth = io::require(b.recipe, "depth").get<int>();
  E.horizon = io::require(b.recipe, "horizon").get<long>();
  E.S = CandidateS<Real>::product(io::product_from_json<Real>(io::require(b.recipe, "S"), "S"));
  E.ratio = load_ratio<Real>(b);
  const auto S1 = CandidateS<Real>::product(io::product_from_json<Real>(io::require(b.recipe, "S1"), "S1"));

  Json checks = Json::array();
  const double tol_id = ctx.tolerance("identity");
  for (const auto& s : io::require(b.recipe, "samples")) {
    const auto zc = io::complex_from_json(s, "samples");
    const auto r = example13_identity(E, Complex<Real>(static_cast<Real>(zc.real()), static_cast<Real>(zc.imag())));
    char name[64];
    std::snprintf(name, sizeof name, "identity_residual(%g%+gi)", double(zc.real()), double(zc.imag()));
    checks.push_back(check(name, "constructions", r.residual, tol_id, r.residual <= tol_id));
  }
  MembershipOptions mo;
  mo.horizon = io::require(b.recipe, "membership_horizon").get<std::size_t>();
  const auto mem = s_membership_report(E.ratio, S1, mo);
  checks.push_back(check("S1_membership", "defect", mem.norm2, 0, mem.pass, "converging"));
  // dyadic Cauchy tail of |S_1(+-2^k)|^2 between K/2 and K
  CompensatedSum<Real> tail;
  for (int k = E.depth / 2 + 1; k <= E.depth; ++k) tail.add(2 * std::norm(evaluate(S1, Complex<Real>(std::ldexp(Real(1), k))).value));
  checks.push_back(check("S1_cauchy_tail", "constructions", tail.value(), ctx.tolerance("cauchy_tail"),
                         tail.value() <= ctx.tolerance("cauchy_tail")));
  return checks;
}

template <class Real>
Json verify_bigsize(const Context& ctx, const Bundle& b) {
  const auto M = size_function(io::require(b.recipe, "M"));
  const auto jumps = io::vector_of<double>(b.recipe, "jumps");
  const double R = io::require(b.recipe, "fidelity_range").get<double>();
  double dev = 0;
  std::vector<double> pts{1.0, R};
  for (double t : jumps)
    if (t >= 1 && t <= R) pts.push_back(t);
  for (double t : pts)
    for (double r : {std::max(1.0, std::nextafter(t, 0.0)), t}) dev = std::max(dev, std::abs(M(r) - double(mu_at(jumps, r))));

  RealZeroProduct<Real> p;
  for (double t : jumps) p.base.push_back(static_cast<Real>(t));
  const auto S = CandidateS<Real>::product(p);
  std::vector<Real> ys, ts;
  for (double y : log_samples(io::require(b.recipe, "y_samples"))) ys.push_back(static_cast<Real>(y));
  for (double y : log_samples(io::require(b.recipe, "type_samples"))) ts.push_back(static_cast<Real>(y));
  const Real floor = static_cast<Real>(ctx.tolerance("size_ratio"));
  const auto prof = size_profile<Real>(S, ys, [&M](Real y) { return static_cast<Real>(M(double(y))); }, floor);
  const auto type = exp_type_estimate(S, ts);

  Json checks = Json::array();
  checks.push_back(check("atomization_fidelity", "constructions", dev, ctx.tolerance("fidelity"), dev <= ctx.tolerance("fidelity")));
  checks.push_back(check("size_ratio_min", "defect", prof.achieves ? prof.min_ratio : Real(0), floor,
                         prof.achieves && prof.y0 == ys.front() && prof.min_ratio >= floor, ">="));
  checks.push_back(check("exp_type_slope", "defect", type.slope, ctx.tolerance("type_slope"),
                         type.slope <= ctx.tolerance("type_slope")));
  return checks;
}

/// Clark fixture {"zeros": [[x, y], ...], "alpha": [re, im]}: Gram matrix of
/// the transformed atom indicators against diag(masses).
template <class Real>
Json verify_clark(const Context& ctx, const Json& fx) {
  std::vector<Complex<Real>> zs;
  const Json& zj = io::require(fx, "zeros");
  if (!zj.is_array()) throw io::IoError("key 'zeros': expected an array");
  for (const auto& v : zj) {
    const auto z = io::complex_from_json(v, "zeros");
    zs.emplace_back(static_cast<Real>(z.real()), static_cast<Real>(z.imag()));
  }
  const auto ac = fx.contains("alpha") ? io::complex_from_json(fx["alpha"], "alpha") : std::complex<long double>(-1);
  const auto B = finite_blaschke<Real>(zs);
  const auto data = clark_measure(B, Complex<Real>(static_cast<Real>(ac.real()), static_cast<Real>(ac.imag())));
  std::vector<RationalH2<Real>> k;
  for (std::size_t j = 0; j < data.atoms.size(); ++j) k.push_back(clark_kernel_rational(B, data, j));
  Real worst = 0;
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = 0; j < k.size(); ++j)
      worst = std::max(worst, std::abs(h2_inner(k[i], k[j]) - (i == j ? Complex<Real>(data.masses[i]) : Complex<Real>(0))));
  std::printf("clark: degree %zu, %zu atoms\n", zs.size(), data.atoms.size());
  Json checks = Json::array();
  checks.push_back(check("clark_gram_deviation", "model_space", worst, ctx.tolerance("clark_gram"), worst <= ctx.tolerance("clark_gram")));
  return checks;
}

template <class Real>
int verify(const Context& ctx) {
  const std::filesystem::path in(ctx.input);
  Json checks;
  std::string kind;
  if (std::filesystem::is_directory(in)) {
    Bundle b{in, io::load_json(in / "recipe.json")};
    kind = io::require(b.recipe, "construction").get<std::string>();
    if (kind == "thm1")
      checks = verify_thm1<Real>(ctx, b);
    else if (kind == "example13")
      checks = verify_example13<Real>(ctx, b);
    else if (kind == "bigsize")
      checks = verify_bigsize<Real>(ctx, b);
    else
      throw io::IoError("key 'construction': unknown construction '" + kind + "'");
  } else {
    const Json fx = io::load_json(in);
    if (!fx.contains("zeros")) throw io::IoError("missing key 'zeros' (expected a bundle directory or a Clark fixture)");
    kind = "clark";
    checks = verify_clark<Real>(ctx, fx);
  }
  Json report;
  report["command"] = "verify";
  report["construction"] = kind;
  report["seed"] = ctx.seed;
  report["precision"] = ctx.extended ? "extended" : "double";
  report["checks"] = checks;
  if (!ctx.out.empty()) {
    std::filesystem::create_directories(ctx.out);
    io::write_json_atomic(ctx.out_path("verify.json"), report);
  }
  std::printf("verify %s:\n", kind.c_str());
  print_checks(checks);
  const bool pass = all_checks_pass(checks);
  std::printf("%s\n", pass ? "all residuals within tolerance" : "residual breach");
  return pass ? ok : residual_breach;
}

}  // namespace

int run_verify(const Context& ctx) {
  if (ctx.input.empty()) throw io::IoError("verify needs --input");
  return ctx.extended ? verify<long double>(ctx) : verify<double>(ctx);
}

}  // namespace rklab::cli
