#include <cstdio>

#include "cli.hpp"
#include "rklab/constructions.hpp"

namespace rklab::cli {

namespace {

Json report_header(const Context& ctx, const std::string& which) {
  Json r;
  r["command"] = "construct";
  r["construction"] = which;
  r["seed"] = ctx.seed;
  r["precision"] = ctx.extended ? "extended" : "double";
  return r;
}

Json invariant_checks(const std::vector<InvariantCheck>& inv) {
  Json a = Json::array();
  for (const auto& c : inv) {
    const bool lt = c.name.find("below") != std::string::npos;
    a.push_back(check(c.name, "constructions", c.value, c.bound, c.pass, lt ? "<" : "evidence"));
  }
  return a;
}

io::CsvTable checks_csv(const Json& checks) {
  io::CsvTable t{{"name", "module", "observed", "relation", "tolerance", "pass"}, {}};
  for (const auto& c : checks)
    t.add_row({c["name"].get<std::string>(), c["module"].get<std::string>(), scalar_text(c["observed"]),
               c["relation"].get<std::string>(), scalar_text(c["tolerance"]), c["pass"].get<bool>() ? "1" : "0"});
  return t;
}

void write_bundle(const Context& ctx, const Json& system, const Json& ratio, const Json& recipe, const Json& reports) {
  const std::filesystem::path dir = ctx.out.empty() ? std::filesystem::path(".") : std::filesystem::path(ctx.out);
  std::filesystem::create_directories(dir);
  io::write_json_atomic(dir / "system.json", system);
  io::write_json_atomic(dir / "ratio.json", ratio);
  io::write_json_atomic(dir / "recipe.json", recipe);
  io::write_json_atomic(dir / "reports.json", reports);
  if (ctx.csv) io::write_csv_atomic(dir / "checks.csv", checks_csv(reports["checks"]));
}

/// Section parameters with the --input file (if any) merged over them.
Json parameters(const Context& ctx, const std::string& which) {
  Json p = ctx.section(which);
  if (!ctx.input.empty()) p.merge_patch(io::load_json(ctx.input));
  return p;
}

template <class Real>
int thm1(const Context& ctx) {
  Json p = parameters(ctx, "thm1");
  // an input system (explicit arrays) replaces the default generator
  if (p.contains("indices")) p.erase("generator");
  auto sys = share(io::system_from_json<Real>(p));
  if (ctx.horizon) {
    const std::size_t K = std::min(sys->size(), std::size_t(*ctx.horizon));
    auto cut = *sys;
    cut.indices.resize(K);
    cut.nodes.resize(K);
    cut.weights.resize(K);
    sys = share(std::move(cut));
  }
  Theorem1Options opt;
  opt.zero_count = p.value("zero_count", opt.zero_count);
  const int max_degree = ctx.max_degree.value_or(p.value("max_degree", 1));
  const auto B = build_theorem1(sys, opt);
  const auto& rc = B.recipe;

  Json recipe;
  recipe["construction"] = "thm1";
  recipe["sparse_labels"] = rc.sparse_labels;
  recipe["sparse_positions"] = rc.sparse_positions;
  recipe["eta"] = io::real_to_json(rc.eta);
  recipe["sparse_total"] = io::real_to_json(rc.sparse_total);
  recipe["perturbations"] = rc.perturbations;
  recipe["sparse_jumps"] = io::real_array(rc.sparse_jumps);
  recipe["big_disk_radii"] = io::real_array(rc.big_disk_radii);
  recipe["zeros"] = io::real_array(B.zeros);
  recipe["min_zero_node_distance"] = io::real_to_json(B.min_zero_node_distance);
  recipe["defect_multiplier"] = "S = 1";
  Json defect = Json::array();
  for (Eigen::Index k = 0; k < B.defect.coefficients.size(); ++k) {
    const auto c = B.defect.coefficients(k);
    defect.push_back(c.imag() == 0 ? io::real_to_json(c.real()) : io::complex_to_json({c.real(), c.imag()}));
  }
  recipe["defect"] = defect;

  Json reports = report_header(ctx, "thm1");
  Json checks = invariant_checks(rc.invariants);
  const auto orth = orthogonality_residual(B.defect, B.ratio, B.zeros, Real(1));
  checks.push_back(check("orthogonality_residual", "defect", orth.max_residual + orth.tail_bound, ctx.tolerance("orthogonality"),
                         orth.max_residual + orth.tail_bound <= ctx.tolerance("orthogonality")));
  const auto kr = kronecker_residuals(B.ratio, B.zeros);
  const Real kmax = std::max(kr.max_off_diagonal, kr.max_diagonal_error);
  checks.push_back(check("kronecker_residual", "generating", kmax, ctx.tolerance("kronecker"), kmax <= ctx.tolerance("kronecker")));
  reports["checks"] = checks;
  Json ex = Json::array();
  io::CsvTable ex_csv{{"degree", "horizon", "partial_sum"}, {}};
  for (const auto& row : exactness_diagnostic(B.ratio, max_degree, sys->size())) {
    Json r;
    r["module"] = "generating";
    r["degree"] = row.degree;
    r["growth"] = std::string(to_string(row.growth));
    r["horizons"] = row.horizons;
    r["partial_sums"] = io::real_array(row.partial_sums);
    ex.push_back(r);
    for (std::size_t i = 0; i < row.horizons.size(); ++i)
      ex_csv.add_row({std::to_string(row.degree), std::to_string(row.horizons[i]), io::csv_real(row.partial_sums[i])});
  }
  reports["exactness"] = ex;

  write_bundle(ctx, io::system_to_json(*B.ratio.system), io::ratio_to_json(B.ratio), recipe, reports);
  if (ctx.csv) {
    io::CsvTable z{{"zero"}, {}};
    for (Real v : B.zeros) z.add_row({io::csv_real(v)});
    io::write_csv_atomic(ctx.out_path("zeros.csv"), z);
    io::write_csv_atomic(ctx.out_path("exactness.csv"), ex_csv);
  }
  std::printf("thm1: %zu nodes, %zu sparse indices, %zu zeros\n", sys->size(), rc.sparse_labels.size(), B.zeros.size());
  print_checks(checks);
  return all_checks_pass(checks) ? ok : builder_failed;
}

template <class Real>
int example13(const Context& ctx) {
  const Json p = parameters(ctx, "example13");
  const int K = io::require(p, "depth").get<int>();
  const long horizon = ctx.horizon.value_or(io::require(p, "horizon").get<long>());
  const auto E = build_example_bn_infty<Real>(K, horizon);
  const auto S1 = build_S1<Real>(K, [f = delta_schedule(io::require(p, "schedule"))](int k) { return static_cast<Real>(f(k)); },
                                 ctx.tolerance("cauchy_tail"));

  Json checks = Json::array();
  io::CsvTable id_csv{{"z_re", "z_im", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "tail_bound"}, {}};
  const double tol_id = ctx.tolerance("identity");
  for (const auto& s : io::require(p, "samples")) {
    const auto zc = io::complex_from_json(s, "samples");
    const Complex<Real> z(static_cast<Real>(zc.real()), static_cast<Real>(zc.imag()));
    const auto r = example13_identity(E, z);
    char name[64];
    std::snprintf(name, sizeof name, "identity_residual(%g%+gi)", double(zc.real()), double(zc.imag()));
    checks.push_back(check(name, "constructions", r.residual, tol_id, r.residual <= tol_id));
    id_csv.add_row({io::csv_real(z.real()), io::csv_real(z.imag()), io::csv_real(r.lhs.real()), io::csv_real(r.lhs.imag()),
                    io::csv_real(r.rhs.real()), io::csv_real(r.rhs.imag()), io::csv_real(r.residual), io::csv_real(r.tail_bound)});
  }
  checks.push_back(check("bsum_doubling_factor", "constructions", E.bsum_factor, 2, E.bsum_factor >= 2, ">="));
  MembershipOptions mo;
  mo.horizon = 2 * (std::size_t(1) << K) + 1;
  const auto mem = s_membership_report(E.ratio, S1.S1, mo);
  checks.push_back(check("S1_membership", "defect", mem.norm2, 0, mem.pass, "converging"));
  checks.push_back(check("S1_cauchy_tail", "constructions", S1.cauchy_tail, ctx.tolerance("cauchy_tail"),
                         S1.cauchy_tail <= ctx.tolerance("cauchy_tail")));

  Json recipe;
  recipe["construction"] = "example13";
  recipe["depth"] = K;
  recipe["horizon"] = horizon;
  recipe["S"] = io::product_to_json(std::get<RealZeroProduct<Real>>(E.S.form));
  recipe["S1"] = io::product_to_json(std::get<RealZeroProduct<Real>>(S1.S1.form));
  recipe["samples"] = p["samples"];
  recipe["membership_horizon"] = mo.horizon;
  recipe["bsum_horizons"] = E.bsum_horizons;
  recipe["bsum"] = io::real_array(E.bsum);
  recipe["dyadic_nodes_added"] = E.dyadic_nodes_added;
  recipe["bsum_nondyadic_increment"] = io::real_to_json(E.bsum_nondyadic_increment);
  recipe["S1_ratio_bound"] = io::real_to_json(S1.ratio_bound);
  recipe["S1_ratio_bound_at"] = S1.ratio_bound_at;

  Json reports = report_header(ctx, "example13");
  reports["checks"] = checks;
  Json m;
  m["module"] = "defect";
  m["horizons"] = mem.horizons;
  m["norm_partial_sums"] = io::real_array(mem.norm_partial_sums);
  m["growth"] = std::string(to_string(mem.growth));
  reports["S1_membership"] = m;

  write_bundle(ctx, io::system_to_json(*E.ratio.system), io::ratio_to_json(E.ratio), recipe, reports);
  if (ctx.csv) {
    io::write_csv_atomic(ctx.out_path("identity.csv"), id_csv);
    io::CsvTable b{{"N", "bsum"}, {}};
    for (std::size_t i = 0; i < E.bsum.size(); ++i) b.add_row({std::to_string(E.bsum_horizons[i]), io::csv_real(E.bsum[i])});
    io::write_csv_atomic(ctx.out_path("bsum.csv"), b);
  }
  std::printf("example13: depth %d, %zu nodes\n", K, E.ratio.system->size());
  print_checks(checks);
  return all_checks_pass(checks) ? ok : builder_failed;
}

template <class Real>
int bigsize(const Context& ctx) {
  const Json p = parameters(ctx, "bigsize");
  const auto M = size_function(io::require(p, "M"));
  const long horizon = ctx.horizon.value_or(p.value("horizon", 4096L));
  const auto B = build_big_size<Real>(M, io::require(p, "range").get<double>(), io::require(p, "fidelity_range").get<double>(),
                                      horizon);
  std::vector<Real> ys, ts;
  for (double y : log_samples(io::require(p, "y_samples"))) ys.push_back(static_cast<Real>(y));
  for (double y : log_samples(io::require(p, "type_samples"))) ts.push_back(static_cast<Real>(y));
  const Real floor = static_cast<Real>(ctx.tolerance("size_ratio"));
  const auto prof = size_profile<Real>(B.S, ys, [&M](Real y) { return static_cast<Real>(M(double(y))); }, floor);
  const auto type = exp_type_estimate(B.S, ts);

  Json checks = Json::array();
  checks.push_back(check("atomization_fidelity", "constructions", B.recipe.sup_deviation, ctx.tolerance("fidelity"),
                         B.recipe.sup_deviation <= ctx.tolerance("fidelity")));
  const bool all_samples = prof.achieves && prof.y0 == ys.front();
  checks.push_back(check("size_ratio_min", "defect", prof.achieves ? prof.min_ratio : Real(0), floor,
                         all_samples && prof.min_ratio >= floor, ">="));
  checks.push_back(check("exp_type_slope", "defect", type.slope, ctx.tolerance("type_slope"),
                         type.slope <= ctx.tolerance("type_slope")));

  Json recipe;
  recipe["construction"] = "bigsize";
  recipe["M"] = p["M"];
  recipe["range"] = p["range"];
  recipe["fidelity_range"] = B.recipe.fidelity_range;
  recipe["jumps"] = B.recipe.jumps;
  recipe["sup_deviation"] = B.recipe.sup_deviation;
  recipe["sup_deviation_at"] = B.recipe.sup_deviation_at;
  recipe["y_samples"] = p["y_samples"];
  recipe["type_samples"] = p["type_samples"];

  Json reports = report_header(ctx, "bigsize");
  reports["checks"] = checks;
  Json prof_j;
  prof_j["module"] = "defect";
  prof_j["achieves"] = prof.achieves;
  prof_j["y0"] = io::real_to_json(prof.y0);
  prof_j["ratio_floor"] = io::real_to_json(prof.ratio_floor);
  reports["size_profile"] = prof_j;
  Json t;
  t["module"] = "defect";
  t["slope"] = io::real_to_json(type.slope);
  t["intercept"] = io::real_to_json(type.intercept);
  t["y_lo"] = io::real_to_json(type.y_lo);
  t["y_hi"] = io::real_to_json(type.y_hi);
  reports["exp_type"] = t;

  write_bundle(ctx, io::system_to_json(*B.ratio.system), io::ratio_to_json(B.ratio), recipe, reports);
  if (ctx.csv) {
    io::CsvTable s{{"y", "log_abs_S", "M", "ratio"}, {}};
    for (const auto& r : prof.rows) s.add_row({io::csv_real(r.y), io::csv_real(r.log_s), io::csv_real(r.m), io::csv_real(r.ratio)});
    io::write_csv_atomic(ctx.out_path("size_profile.csv"), s);
  }
  std::printf("bigsize: %zu jumps up to %g\n", B.recipe.jumps.size(), B.recipe.jumps.back());
  print_checks(checks);
  return all_checks_pass(checks) ? ok : builder_failed;
}

}  // namespace

int run_construct(const Context& ctx, const std::string& which) {
  if (which == "thm1") return ctx.extended ? thm1<long double>(ctx) : thm1<double>(ctx);
  if (which == "example13") return ctx.extended ? example13<long double>(ctx) : example13<double>(ctx);
  if (which == "bigsize") return ctx.extended ? bigsize<long double>(ctx) : bigsize<double>(ctx);
  throw io::IoError("unknown construction '" + which + "'");
}

}  // namespace rklab::cli
