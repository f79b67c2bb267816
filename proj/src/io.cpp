#include "rklab/io.hpp"

#include <cfloat>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace rklab::io {

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) return v > 0 ? "\"inf\"" : (v < 0 ? "\"-inf\"" : "\"nan\"");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void dump_to(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(std::size_t(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(std::size_t(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + Json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump_to(it.value(), indent, depth + 1, out);
      }
      out += nl + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // short arrays of scalars stay on one line
      bool flat = j.size() <= 4;
      for (const auto& v : j)
        if (v.is_structured()) flat = false;
      out += "[";
      if (!flat) out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += flat ? (indent > 0 ? " " : "") : nl;
        }
        first = false;
        if (!flat) out += pad;
        dump_to(v, indent, depth + 1, out);
      }
      if (!flat) out += nl + close_pad;
      out += "]";
      return;
    }
    case Json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

}  // namespace

Json real_to_json(long double v) {
  const bool representable =
      !std::isfinite(v) || v == 0 || (std::fabs(v) >= DBL_MIN && std::fabs(v) <= DBL_MAX);
  if (representable) return Json(static_cast<double>(v));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return Json(std::string(buf));
}

long double real_from_json(const Json& j, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    try {
      std::size_t used = 0;
      const long double v = std::stold(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    if (s == "inf") return std::numeric_limits<long double>::infinity();
    if (s == "-inf") return -std::numeric_limits<long double>::infinity();
    throw IoError("key '" + key + "': cannot parse '" + s + "' as a real");
  }
  throw IoError("key '" + key + "': expected a number");
}

Json complex_to_json(std::complex<long double> z) { return Json::array({real_to_json(z.real()), real_to_json(z.imag())}); }

std::complex<long double> complex_from_json(const Json& j, const std::string& key) {
  if (j.is_array()) {
    if (j.size() != 2) throw IoError("key '" + key + "': complex values are [re, im]");
    return {real_from_json(j[0], key), real_from_json(j[1], key)};
  }
  return {real_from_json(j, key), 0};
}

const Json& require(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw IoError("missing key '" + key + "'");
  return j[key];
}

std::string dump(const Json& j, int indent) {
  std::string out;
  dump_to(j, indent, 0, out);
  out += "\n";
  return out;
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw IoError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out.flush()) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
}

void write_json_atomic(const std::filesystem::path& path, const Json& j) { write_text_atomic(path, dump(j)); }

std::string csv_real(long double v) {
  char buf[64];
  if (std::isfinite(v) && (v == 0 || (std::fabs(v) >= DBL_MIN && std::fabs(v) <= DBL_MAX)))
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
  else
    std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}

void write_csv_atomic(const std::filesystem::path& path, const CsvTable& table) {
  std::string text;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text += (i ? "," : "") + cells[i];
    text += "\n";
  };
  line(table.header);
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw IoError("CSV row width differs from header in '" + path.string() + "'");
    line(r);
  }
  write_text_atomic(path, text);
}

Json majorant_to_json(const Majorant<long double>& m) {
  Json j;
  j["kind"] = m.kind == MajorantKind::geometric ? "geometric" : (m.kind == MajorantKind::power ? "power" : "none");
  j["scale"] = real_to_json(m.scale);
  j["rate"] = real_to_json(m.rate);
  return j;
}

Majorant<long double> majorant_from_json(const Json& j, const std::string& key) {
  const std::string kind = require(j, "kind").get<std::string>();
  const long double s = j.contains("scale") ? real_from_json(j["scale"], key + ".scale") : 1.0L;
  const long double r = real_from_json(require(j, "rate"), key + ".rate");
  if (kind == "geometric") return Majorant<long double>::geometric(s, r);
  if (kind == "power") return Majorant<long double>::power(s, r);
  if (kind == "none") return {};
  throw IoError("key '" + key + ".kind': expected 'geometric', 'power' or 'none'");
}

WeightLaw weight_law_from_json(const Json& j) {
  static const std::vector<std::pair<std::string, WeightKind>> kinds{{"constant", WeightKind::constant},
                                                                     {"geometric", WeightKind::geometric},
                                                                     {"exponential", WeightKind::exponential},
                                                                     {"power", WeightKind::power},
                                                                     {"monomial", WeightKind::monomial}};
  const std::string kind = require(j, "kind").get<std::string>();
  WeightLaw w;
  bool found = false;
  for (const auto& [name, k] : kinds)
    if (name == kind) {
      w.kind = k;
      found = true;
    }
  if (!found) throw IoError("key 'law.kind': unknown weight law '" + kind + "'");
  w.scale = j.value("scale", 1.0);
  w.rate = j.value("rate", 0.0);
  w.alpha = j.value("alpha", 1.0);
  return w;
}

Json weight_law_to_json(const WeightLaw& w) {
  static const char* names[] = {"constant", "geometric", "exponential", "power", "monomial"};
  Json j;
  j["kind"] = names[static_cast<int>(w.kind)];
  j["scale"] = w.scale;
  j["rate"] = w.rate;
  j["alpha"] = w.alpha;
  return j;
}

}  // namespace rklab::io
