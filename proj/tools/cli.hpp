#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "rklab/io.hpp"

namespace rklab::cli {

using io::Json;

enum Exit : int { ok = 0, io_error = 1, inadmissible = 2, builder_failed = 3, residual_breach = 4 };

struct Context {
  std::string input;
  std::string out;
  std::optional<long> horizon;
  std::optional<int> max_degree;
  double tolerance_scale = 1.0;
  long seed = 1;
  bool extended = true;
  bool csv = false;
  Json defaults;

  double tolerance(const std::string& name) const {
    return tolerance_scale * io::require(io::require(defaults, "tolerances"), name).get<double>();
  }
  const Json& section(const std::string& name) const { return io::require(defaults, name); }
  std::filesystem::path out_path(const std::string& file) const { return std::filesystem::path(out) / file; }
};

/// One verified quantity: observed value against its tolerance, and which
/// module produced it.
inline Json check(const std::string& name, const std::string& module, long double observed, long double tolerance,
                  bool pass, const std::string& relation = "<=") {
  Json j;
  j["name"] = name;
  j["module"] = module;
  j["observed"] = io::real_to_json(observed);
  j["tolerance"] = io::real_to_json(tolerance);
  j["relation"] = relation;
  j["pass"] = pass;
  return j;
}

inline bool all_checks_pass(const Json& checks) {
  for (const auto& c : checks)
    if (!c["pass"].get<bool>()) return false;
  return true;
}

inline std::string scalar_text(const Json& j) {
  std::string s = io::dump(j, 0);
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

inline void print_checks(const Json& checks) {
  for (const auto& c : checks)
    std::printf("  %-4s %-52s %s %s %s\n", c["pass"].get<bool>() ? "ok" : "FAIL", c["name"].get<std::string>().c_str(),
                scalar_text(c["observed"]).c_str(), c["relation"].get<std::string>().c_str(),
                scalar_text(c["tolerance"]).c_str());
}

/// Log-spaced samples from {"from", "to", "count"}.
inline std::vector<double> log_samples(const Json& j) {
  const double a = std::log10(io::require(j, "from").get<double>());
  const double b = std::log10(io::require(j, "to").get<double>());
  const int n = io::require(j, "count").get<int>();
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(std::pow(10.0, n > 1 ? a + (b - a) * i / (n - 1) : a));
  return v;
}

/// Size-function descriptors: sqrt, log1p, linear, power (exponent).
inline std::function<double(double)> size_function(const Json& j) {
  const std::string kind = io::require(j, "kind").get<std::string>();
  const double scale = j.value("scale", 1.0);
  if (kind == "sqrt") return [scale](double r) { return scale * std::sqrt(r); };
  if (kind == "log1p") return [scale](double r) { return scale * std::log1p(r); };
  if (kind == "linear") return [scale](double r) { return scale * r; };
  if (kind == "power") {
    const double p = io::require(j, "exponent").get<double>();
    return [scale, p](double r) { return scale * std::pow(r, p); };
  }
  throw io::IoError("key 'M.kind': unknown size function '" + kind + "'");
}

/// delta_k schedules for the second multiplier.
inline std::function<long double(int)> delta_schedule(const Json& j) {
  const std::string kind = io::require(j, "kind").get<std::string>();
  if (kind == "inverse_square_exponent") return [](int k) { return std::ldexp(1.0L, -k * k); };
  if (kind == "geometric") {
    const long double base = io::real_from_json(io::require(j, "base"), "schedule.base");
    return [base](int k) { return std::pow(base, static_cast<long double>(k)); };
  }
  if (kind == "constant") {
    const long double v = io::real_from_json(io::require(j, "value"), "schedule.value");
    return [v](int) { return v; };
  }
  throw io::IoError("key 'schedule.kind': unknown schedule '" + kind + "'");
}

int run_space_check(const Context& ctx);
int run_construct(const Context& ctx, const std::string& which);
int run_verify(const Context& ctx);

}  // namespace rklab::cli
