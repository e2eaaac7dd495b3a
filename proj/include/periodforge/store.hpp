#pragma once

// Solution records as canonical JSON: sorted keys, two-space indent, trailing
// newline. Parameter values stay decimal strings end to end.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "periodforge/errors.hpp"
#include "periodforge/family_spec.hpp"
#include "periodforge/numerics.hpp"

namespace periodforge {

enum class Provenance { SOLVED, PAPER_TABLE };

inline const char* toString(Provenance p) { return p == Provenance::SOLVED ? "SOLVED" : "PAPER_TABLE"; }

using ParamMap = std::map<std::string, std::string>;

struct SolutionRecord {
  static constexpr int kSchemaVersion = 1;

  int schemaVersion = kSchemaVersion;
  std::string name;  // bundled table key, empty for solver output
  FamilySpec spec;
  std::vector<ParamMap> points;  // usually one; several for a tabulated branch
  ParamMap dependent;            // values fixed by the end constraint, as printed or computed
  std::optional<std::string> pinnedName;
  std::string pinnedValue;
  std::string residualNorm;  // empty when not evaluated
  int precisionUsed = 0;
  int iterations = 0;
  std::string timestamp;
  Provenance provenance = Provenance::SOLVED;
  bool certifying = true;  // false marks a table with a known anomaly
  std::vector<std::string> notes;

  friend bool operator==(const SolutionRecord&, const SolutionRecord&) = default;
};

inline bool isDecimal(const std::string& s) {
  static const std::regex re(R"(^-?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$)");
  return std::regex_match(s, re);
}

inline std::string utcTimestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json toJson(const SolutionRecord& r) {
  nlohmann::json j;
  j["schemaVersion"] = r.schemaVersion;
  j["name"] = r.name;
  j["family"] = {{"kind", std::string(kindName(r.spec.kind))}, {"n", r.spec.n}, {"m", r.spec.m}};
  j["points"] = r.points;
  j["dependent"] = r.dependent;
  if (r.pinnedName) j["pinned"] = {{"name", *r.pinnedName}, {"value", r.pinnedValue}};
  else j["pinned"] = nullptr;
  j["residualNorm"] = r.residualNorm;
  j["precisionUsed"] = r.precisionUsed;
  j["iterations"] = r.iterations;
  j["timestamp"] = r.timestamp;
  j["provenance"] = toString(r.provenance);
  j["certifying"] = r.certifying;
  j["notes"] = r.notes;
  return j;
}

inline std::string serialize(const SolutionRecord& r) { return toJson(r).dump(2) + "\n"; }

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline void checkDecimal(const std::string& value, const std::string& fieldName) {
  if (!isDecimal(value)) throw ParseError("field '" + fieldName + "' is not a decimal number: '" + value + "'");
}

inline ParamMap paramMap(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError("field '" + where + "' must be an object");
  ParamMap m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) throw ParseError("field '" + where + "." + it.key() + "' must be a string");
    const std::string v = it.value().get<std::string>();
    checkDecimal(v, where + "." + it.key());
    m[it.key()] = v;
  }
  return m;
}

}  // namespace detail

inline SolutionRecord parseRecord(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed record: ") + e.what());
  }
  SolutionRecord r;
  try {
    r.schemaVersion = detail::field(j, "schemaVersion").get<int>();
    if (r.schemaVersion != SolutionRecord::kSchemaVersion)
      throw ParseError("field 'schemaVersion': unsupported version " + std::to_string(r.schemaVersion));
    r.name = detail::field(j, "name").get<std::string>();
    const auto& fam = detail::field(j, "family");
    r.spec.kind = parseKind(detail::field(fam, "kind").get<std::string>());
    r.spec.n = detail::field(fam, "n").get<int>();
    r.spec.m = detail::field(fam, "m").get<int>();
    const auto& pts = detail::field(j, "points");
    if (!pts.is_array()) throw ParseError("field 'points' must be an array");
    for (size_t i = 0; i < pts.size(); ++i) r.points.push_back(detail::paramMap(pts[i], "points[" + std::to_string(i) + "]"));
    r.dependent = detail::paramMap(detail::field(j, "dependent"), "dependent");
    const auto& pin = detail::field(j, "pinned");
    if (!pin.is_null()) {
      r.pinnedName = detail::field(pin, "name").get<std::string>();
      r.pinnedValue = detail::field(pin, "value").get<std::string>();
      detail::checkDecimal(r.pinnedValue, "pinned.value");
    }
    r.residualNorm = detail::field(j, "residualNorm").get<std::string>();
    if (!r.residualNorm.empty()) detail::checkDecimal(r.residualNorm, "residualNorm");
    r.precisionUsed = detail::field(j, "precisionUsed").get<int>();
    r.iterations = detail::field(j, "iterations").get<int>();
    r.timestamp = detail::field(j, "timestamp").get<std::string>();
    const std::string prov = detail::field(j, "provenance").get<std::string>();
    if (prov == "SOLVED") r.provenance = Provenance::SOLVED;
    else if (prov == "PAPER_TABLE") r.provenance = Provenance::PAPER_TABLE;
    else throw ParseError("field 'provenance': unknown value '" + prov + "'");
    r.certifying = detail::field(j, "certifying").get<bool>();
    r.notes = detail::field(j, "notes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::type_error& e) {
    throw ParseError(std::string("record field has the wrong type: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("field 'family.kind': ") + e.what());
  }
  return r;
}

/// Writes the canonical form via a temporary file and rename.
inline void save(const SolutionRecord& r, const std::filesystem::path& path) {
  const std::string text = serialize(r);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move record into place at " + path.string() + ": " + ec.message());
  }
}

inline std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SolutionRecord load(const std::filesystem::path& path) {
  try {
    return parseRecord(readFile(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

/// Parameters of point `i` in the family's variable order.
inline std::vector<PrecReal> pointParams(const SolutionRecord& r, const std::vector<std::string>& names, Precision p,
                                         size_t i = 0) {
  if (i >= r.points.size()) throw ParseError("record has no point " + std::to_string(i));
  std::vector<PrecReal> out;
  for (const auto& n : names) {
    auto it = r.points[i].find(n);
    if (it == r.points[i].end()) throw ParseError("record point lacks parameter '" + n + "'");
    out.emplace_back(std::string_view(it->second), p);
  }
  return out;
}

}  // namespace periodforge

#include "periodforge/paper_tables.hpp"
