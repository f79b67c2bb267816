#pragma once

// JSON/CSV artifacts. Numbers are written with 17 significant digits; reals
// outside the double range (extended-precision runs) are written as decimal
// strings, and readers accept either form. Files are written atomically.

#include <complex>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rklab/density.hpp"
#include "rklab/generating.hpp"
#include "rklab/numerics.hpp"
#include "rklab/space.hpp"

namespace rklab::io {

using Json = nlohmann::ordered_json;

/// I/O and schema failures; the message names the offending key or path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json real_to_json(long double v);
long double real_from_json(const Json& j, const std::string& key);
Json complex_to_json(std::complex<long double> z);
std::complex<long double> complex_from_json(const Json& j, const std::string& key);

/// j[key], or IoError("missing key 'key'").
const Json& require(const Json& j, const std::string& key);

/// Serializes with 17 significant digits for every floating-point number.
std::string dump(const Json& j, int indent = 2);

Json load_json(const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json_atomic(const std::filesystem::path& path, const Json& j);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string csv_real(long double v);
void write_csv_atomic(const std::filesystem::path& path, const CsvTable& table);

Json majorant_to_json(const Majorant<long double>& m);
Majorant<long double> majorant_from_json(const Json& j, const std::string& key);
WeightLaw weight_law_from_json(const Json& j);
Json weight_law_to_json(const WeightLaw& w);

template <class T>
std::vector<T> vector_of(const Json& j, const std::string& key) {
  const Json& a = require(j, key);
  if (!a.is_array()) throw IoError("key '" + key + "': expected an array");
  std::vector<T> out;
  for (const auto& v : a) {
    if constexpr (std::is_same_v<T, long>) {
      if (!v.is_number_integer()) throw IoError("key '" + key + "': expected integers");
      out.push_back(v.get<long>());
    } else {
      out.push_back(static_cast<T>(real_from_json(v, key)));
    }
  }
  return out;
}

/// A system given explicitly ("indices", "nodes", "weights") or by a
/// "generator" descriptor {"set", "first", "last", "law"}.
template <class Real>
NodeWeightSystem<Real> system_from_json(const Json& j) {
  if (!j.is_object()) throw IoError("system: expected a JSON object");
  NodeWeightSystem<Real> s;
  if (j.contains("generator")) {
    const Json& g = j["generator"];
    const std::string set = require(g, "set").get<std::string>();
    if (set != "integers" && set != "naturals") throw IoError("key 'set': expected 'integers' or 'naturals'");
    const long first = g.value("first", 0L), last = require(g, "last").get<long>();
    s = lattice_system<Real>(set == "integers" ? IndexSet::integers : IndexSet::naturals, first, last,
                             weight_law_from_json(require(g, "law")), g.value("truncated", true));
  } else {
    s.indices = vector_of<long>(j, "indices");
    const Json& nodes = require(j, "nodes");
    if (!nodes.is_array()) throw IoError("key 'nodes': expected an array");
    for (const auto& v : nodes) {
      const auto z = complex_from_json(v, "nodes");
      s.nodes.emplace_back(static_cast<Real>(z.real()), static_cast<Real>(z.imag()));
    }
    s.weights = vector_of<Real>(j, "weights");
    s.truncated = j.value("truncated", true);
    for (const auto& z : s.nodes)
      if (z.imag() != 0) s.real_nodes = false;
    if (j.contains("decay_majorant")) s.decay_majorant = majorant_from_json(j["decay_majorant"], "decay_majorant").template cast<Real>();
    if (j.contains("weight_majorant"))
      s.weight_majorant = majorant_from_json(j["weight_majorant"], "weight_majorant").template cast<Real>();
  }
  if (s.indices.size() != s.nodes.size() || s.nodes.size() != s.weights.size())
    throw IoError("keys 'indices', 'nodes', 'weights': lengths differ");
  try {
    s.validate();
  } catch (const Error& e) {
    throw IoError(std::string("system: ") + e.what());
  }
  return s;
}

template <class Real>
Json system_to_json(const NodeWeightSystem<Real>& s) {
  Json j;
  j["indices"] = s.indices;
  Json nodes = Json::array(), weights = Json::array();
  for (const auto& z : s.nodes)
    nodes.push_back(s.real_nodes ? real_to_json(z.real()) : complex_to_json({z.real(), z.imag()}));
  for (Real w : s.weights) weights.push_back(real_to_json(w));
  j["nodes"] = nodes;
  j["weights"] = weights;
  j["truncated"] = s.truncated;
  if (s.decay_majorant.present()) j["decay_majorant"] = majorant_to_json(s.decay_majorant.template cast<long double>());
  if (s.weight_majorant.present()) j["weight_majorant"] = majorant_to_json(s.weight_majorant.template cast<long double>());
  return j;
}

template <class Real>
Json complex_array(const std::vector<Complex<Real>>& v) {
  Json a = Json::array();
  for (const auto& z : v) a.push_back(complex_to_json({z.real(), z.imag()}));
  return a;
}

template <class Real>
Json real_array(const std::vector<Real>& v) {
  Json a = Json::array();
  for (Real x : v) a.push_back(real_to_json(x));
  return a;
}

/// Residues (and majorants) of a ratio over `system`; real residues are
/// written as plain reals.
template <class Real>
Json ratio_to_json(const GeneratingRatio<Real>& g) {
  bool real = true;
  for (const auto& d : g.residues)
    if (d.imag() != 0) real = false;
  Json j;
  Json r = Json::array();
  for (const auto& d : g.residues) r.push_back(real ? real_to_json(d.real()) : complex_to_json({d.real(), d.imag()}));
  j["residues"] = r;
  if (g.quotient_majorant.present()) j["quotient_majorant"] = majorant_to_json(g.quotient_majorant.template cast<long double>());
  if (g.residue_majorant.present()) j["residue_majorant"] = majorant_to_json(g.residue_majorant.template cast<long double>());
  return j;
}

template <class Real>
GeneratingRatio<Real> ratio_from_json(const Json& j, SystemPtr<Real> system) {
  GeneratingRatio<Real> g{system, {}};
  const Json& r = require(j, "residues");
  if (!r.is_array()) throw IoError("key 'residues': expected an array");
  for (const auto& v : r) {
    const auto d = complex_from_json(v, "residues");
    g.residues.emplace_back(static_cast<Real>(d.real()), static_cast<Real>(d.imag()));
  }
  if (g.residues.size() != system->size()) throw IoError("key 'residues': length differs from the system");
  if (j.contains("quotient_majorant"))
    g.quotient_majorant = majorant_from_json(j["quotient_majorant"], "quotient_majorant").template cast<Real>();
  if (j.contains("residue_majorant"))
    g.residue_majorant = majorant_from_json(j["residue_majorant"], "residue_majorant").template cast<Real>();
  return g;
}

/// Zeros +-(base_k + shift_k) of a real-zero product.
template <class Real>
Json product_to_json(const RealZeroProduct<Real>& p) {
  Json j;
  j["base"] = real_array(p.base);
  if (!p.shift.empty()) j["shift"] = real_array(p.shift);
  return j;
}

template <class Real>
RealZeroProduct<Real> product_from_json(const Json& j, const std::string& key) {
  RealZeroProduct<Real> p;
  p.base = vector_of<Real>(j, "base");
  if (j.contains("shift")) p.shift = vector_of<Real>(j, "shift");
  try {
    p.validate();
  } catch (const Error& e) {
    throw IoError("key '" + key + "': " + e.what());
  }
  return p;
}

}  // namespace rklab::io
