#pragma once

// Glue between the solver and stored records: building records from
// solutions, residual certification of records, seed sources and pin
// schedules.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "periodforge/families.hpp"
#include "periodforge/solver.hpp"
#include "periodforge/store.hpp"

namespace periodforge {

inline SolutionRecord recordFromSolution(const Solution& s) {
  SolutionRecord r;
  r.spec = s.spec;
  ParamMap point;
  for (size_t i = 0; i < s.names.size(); ++i) point[s.names[i]] = s.params[i];
  r.points.push_back(std::move(point));
  if (s.dependentB) r.dependent["b"] = toString(*s.dependentB, s.precisionUsed);
  r.pinnedName = s.pinnedName;
  r.pinnedValue = s.pinnedValue;
  r.residualNorm = toString(s.residualNorm, 6);
  r.precisionUsed = s.precisionUsed;
  r.iterations = s.iterations;
  r.timestamp = utcTimestamp();
  r.provenance = Provenance::SOLVED;
  return r;
}

struct PointVerdict {
  bool pass = false;
  std::string maxResidual;  // empty when evaluation failed
  std::string message;
};

struct Certification {
  int evaluationDigits = 0;
  std::string tolerance;
  std::vector<PointVerdict> points;
  bool pass() const {
    for (const auto& v : points)
      if (!v.pass) return false;
    return !points.empty();
  }
};

/// Tolerance implied by a record's working precision: 10^-(P-10), but never
/// tighter than 10^-(P/2) for short tables.
inline int impliedToleranceExponent(int workingDigits) { return std::max(workingDigits - 10, workingDigits / 2); }

/// Residual max-norm at every point of the record, evaluated with guard
/// digits beyond the record's own precision.
inline Certification certify(const SolutionRecord& r, std::optional<int> evalDigits = std::nullopt,
                             std::optional<int> toleranceExponent = std::nullopt) {
  Certification c;
  const int work = std::max(r.precisionUsed, Precision::kMinDigits);
  c.evaluationDigits = evalDigits.value_or(std::max(work + 10, 40));
  const Precision p(c.evaluationDigits);
  const int texp = toleranceExponent.value_or(impliedToleranceExponent(work));
  const PrecReal tol = pow10(-texp, p);
  c.tolerance = "1e-" + std::to_string(texp);
  const auto names = variableNames(r.spec);
  for (size_t i = 0; i < r.points.size(); ++i) {
    PointVerdict v;
    try {
      const auto x = pointParams(r, names, p, i);
      const auto res = residualVector(instantiate(r.spec, x, p), p);
      const PrecReal m = maxNorm(res, p);
      v.maxResidual = toString(m, 6);
      v.pass = m <= tol;
      v.message = v.pass ? "residual within tolerance" : "residual above tolerance";
    } catch (const Error& e) {
      v.message = e.what();
    }
    c.points.push_back(std::move(v));
  }
  return c;
}

/// First bundled table for the family, if any.
inline std::optional<SolutionRecord> bundledTableFor(const FamilySpec& spec) {
  for (auto& r : bundledPaperTables())
    if (r.spec == spec) return r;
  return std::nullopt;
}

/// Seed from "default", "paper" or "file:PATH".
inline std::vector<PrecReal> seedFromSource(const FamilySpec& spec, const std::string& source, Precision p) {
  if (source.empty() || source == "default") return defaultSeed(spec, p);
  const auto names = variableNames(spec);
  if (source == "paper") {
    auto r = bundledTableFor(spec);
    if (!r) throw ConfigError("no published table for " + describe(spec));
    return pointParams(*r, names, p);
  }
  if (source.rfind("file:", 0) == 0) {
    const SolutionRecord r = load(source.substr(5));
    if (!(r.spec == spec)) throw ConfigError("seed record is for " + describe(r.spec) + ", not " + describe(spec));
    return pointParams(r, names, p);
  }
  throw ConfigError("seed source must be default, paper or file:PATH, got '" + source + "'");
}

/// Record from a path or "bundled:NAME".
inline SolutionRecord recordFromSource(const std::string& source) {
  if (source.rfind("bundled:", 0) == 0) return bundledPaperTable(source.substr(8));
  return load(source);
}

/// One decimal per line; blank lines and '#' comments are skipped.
inline std::vector<PrecReal> parseSchedule(const std::string& text, Precision p) {
  std::vector<PrecReal> out;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    if (!isDecimal(tok)) throw ParseError("schedule line " + std::to_string(lineNo) + ": not a decimal: '" + tok + "'");
    out.emplace_back(std::string_view(tok), p);
  }
  if (out.empty()) throw ParseError("schedule has no values");
  return out;
}

/// n values from lo to hi, evenly spaced in log|x|.
inline std::vector<PrecReal> logSpaced(const PrecReal& lo, const PrecReal& hi, int n, Precision p) {
  if (n < 2) throw ConfigError("a log-spaced schedule needs at least 2 values");
  std::vector<PrecReal> out;
  const PrecReal a = log(abs(convert(lo, p))), b = log(abs(convert(hi, p)));
  for (int k = 0; k < n; ++k) {
    PrecReal m = exp(a + (b - a) * PrecReal(k, p) / PrecReal(n - 1, p));
    out.push_back(lo.sign() < 0 ? -m : m);
  }
  return out;
}

}  // namespace periodforge
