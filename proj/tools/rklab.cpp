#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "cli.hpp"

#ifndef RKLAB_DEFAULTS_FILE
#define RKLAB_DEFAULTS_FILE "config/rklab-defaults.json"
#endif

namespace rklab::cli {

namespace {

template <class Real>
int space_check(const Context& ctx) {
  const auto sys = share(io::system_from_json<Real>(io::load_json(ctx.input)));
  const std::size_t horizon = ctx.horizon ? std::size_t(*ctx.horizon) : sys->size();
  const auto adm = check_admissibility(*sys, horizon);

  Json report;
  report["command"] = "space-check";
  report["seed"] = ctx.seed;
  report["precision"] = ctx.extended ? "extended" : "double";
  report["size"] = sys->size();
  Json a;
  a["module"] = "space";
  a["pass"] = adm.pass;
  a["growth"] = std::string(to_string(adm.growth));
  a["partial_sum"] = io::real_to_json(adm.partial_sum);
  a["majorant_tail"] = io::real_to_json(adm.majorant_tail);
  a["horizons"] = adm.horizons;
  a["partial_sums"] = io::real_array(adm.partial_sums);
  a["reason"] = adm.reason;
  report["admissibility"] = a;
  std::printf("admissibility: %s (%s)\n", adm.pass ? "pass" : "FAIL", adm.reason.c_str());
  if (adm.pass && sys->real_nodes) {
    // frame diagnostics at a few points off the real line
    const std::vector<Complex<Real>> pts{{Real(0), Real(1)}, {Real(1), Real(2)}, {Real(-3), Real(1)}};
    const auto fb = frame_bounds(sys, pts);
    Json f;
    f["module"] = "space";
    f["points"] = io::complex_array(pts);
    f["lower"] = io::real_to_json(fb.lower);
    f["upper"] = io::real_to_json(fb.upper);
    f["max_relative_tail"] = io::real_to_json(fb.max_relative_tail);
    report["frame_bounds"] = f;
    std::printf("frame bounds on %zu kernels: [%.6g, %.6g]\n", pts.size(), double(fb.lower), double(fb.upper));
  }
  if (!ctx.out.empty()) {
    std::filesystem::create_directories(ctx.out);
    io::write_json_atomic(ctx.out_path("space_check.json"), report);
  }
  return adm.pass ? ok : inadmissible;
}

Json load_defaults() {
  const char* env = std::getenv("RKLAB_DEFAULTS");
  return io::load_json(env && *env ? env : RKLAB_DEFAULTS_FILE);
}

}  // namespace

int run_space_check(const Context& ctx) {
  if (ctx.input.empty()) throw io::IoError("space-check needs --input");
  return ctx.extended ? space_check<long double>(ctx) : space_check<double>(ctx);
}

}  // namespace rklab::cli

int main(int argc, char** argv) {
  using namespace rklab;
  using namespace rklab::cli;
  CLI::App app{"rklab: de Branges-type spaces, biorthogonal systems and model-space diagnostics"};
  app.require_subcommand(1);

  Context ctx;
  std::string precision;
  long horizon = 0;
  int max_degree = 0;
  std::string which;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--input", ctx.input, "input file or bundle directory");
    sub->add_option("--out", ctx.out, "output directory");
    sub->add_option("--horizon", horizon, "node horizon override");
    sub->add_option("--max-degree", max_degree, "maximal polynomial degree for diagnostics");
    sub->add_option("--tolerance-scale", ctx.tolerance_scale, "multiplier for every tolerance");
    sub->add_option("--seed", ctx.seed, "seed for randomized sweeps");
    sub->add_option("--precision", precision, "double or extended")->check(CLI::IsMember({"double", "extended"}));
    sub->add_flag("--csv", ctx.csv, "also emit CSV tables");
  };
  auto* space = app.add_subcommand("space-check", "admissibility and frame diagnostics of a system");
  auto* construct = app.add_subcommand("construct", "build thm1 | example13 | bigsize bundles");
  auto* verify = app.add_subcommand("verify", "re-check a bundle or a Clark fixture");
  common(space);
  common(construct);
  common(verify);
  construct->add_option("which", which, "construction")->required()->check(CLI::IsMember({"thm1", "example13", "bigsize"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : io_error;
  }

  try {
    ctx.defaults = load_defaults();
    ctx.extended = (precision.empty() ? io::require(ctx.defaults, "precision").get<std::string>() : precision) == "extended";
    if (horizon > 0) ctx.horizon = horizon;
    if (max_degree > 0) ctx.max_degree = max_degree;
    if (ctx.seed == 1 && ctx.defaults.contains("seed")) ctx.seed = ctx.defaults["seed"].get<long>();
    if (*space) return run_space_check(ctx);
    if (*construct) return run_construct(ctx, which);
    if (*verify) return run_verify(ctx);
  } catch (const io::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return io_error;
  } catch (const Json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return io_error;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return io_error;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return *construct ? builder_failed : (*verify ? residual_breach : inadmissible);
  }
  return io_error;
}
