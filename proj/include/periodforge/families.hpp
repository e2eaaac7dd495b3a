#pragma once

// Family templates: parameter vector -> branch divisor + period system.
//
// Orthogonal kinds are all instances of one (m,n) pattern. Walking the unit
// circle's real trace a_1..a_n, +1, 1/a_n..1/a_1, 1/b_1..1/b_m, -1, b_m..b_1
// the roles alternate NUM, DEN, NUM, ... starting at a_1 (at +1 when n = 0).
// Inverse partners then share a role and w^2(0) = -1. Every gap between
// consecutive points of (0,1] and of [-1,0) carries one equation with
// target 0, on PHI1 or PHI2 according to the sign of w^2 there.
//
// Parallel kinds group a_1, a_2, ... in blocks of four (two zeros, two poles).

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "periodforge/curve.hpp"
#include "periodforge/errors.hpp"
#include "periodforge/family_spec.hpp"
#include "periodforge/numerics.hpp"
#include "periodforge/parallel.hpp"
#include "periodforge/quadrature.hpp"

namespace periodforge {

struct Variable {
  std::string name;
  int sign = 1;  // +1: lives in (0,1), -1: lives in (-1,0)
};

struct PeriodEquation {
  FormKind form = FormKind::PHI1;
  Segment segment;
  PrecReal target;  // residual = Re(integral) + target
  std::string label;
};

struct PeriodSystem {
  std::vector<PeriodEquation> equations;
  std::vector<Variable> variables;
  // each chain lists variable indices whose values must strictly increase
  std::vector<std::vector<int>> chains;
  std::optional<std::string> pinned;
};

struct FamilyInstance {
  FamilySpec spec;
  WeierstrassData wd;
  PeriodSystem system;
  std::vector<PrecReal> params;
  std::optional<PrecReal> dependentB;
};

namespace detail {

inline std::vector<Variable> namedRange(const char* prefix, int count, int sign) {
  std::vector<Variable> v;
  for (int i = 1; i <= count; ++i) v.push_back({prefix + std::to_string(i), sign});
  return v;
}

inline std::vector<int> iota(int from, int count) {
  std::vector<int> v;
  for (int i = 0; i < count; ++i) v.push_back(from + i);
  return v;
}

inline int parallelACount(const FamilySpec& s) {
  switch (s.kind) {
    case FamilyKind::RTW2: return 2;
    case FamilyKind::PAR_4N: return 4 * s.n;
    case FamilyKind::PAR_4N1: return 4 * s.n + 1;
    case FamilyKind::PAR_4N2: return 4 * s.n + 2;
    case FamilyKind::PAR_4N3: return 4 * s.n + 3;
    default: return 0;
  }
}

inline bool hasFreeB(FamilyKind k) { return k == FamilyKind::PAR_4N1 || k == FamilyKind::PAR_4N3; }

}  // namespace detail

/// Variables (names and sign domains) and ordering chains for a kind.
inline PeriodSystem variableLayout(const FamilySpec& spec) {
  validateSpec(spec);
  PeriodSystem sys;
  int m = 0, n = 0;
  if (typeIndices(spec, m, n)) {
    sys.variables = detail::namedRange("a", n, 1);
    auto b = detail::namedRange("b", m, -1);
    sys.variables.insert(sys.variables.end(), b.begin(), b.end());
    if (n > 1) sys.chains.push_back(detail::iota(0, n));
    if (m > 1) {
      // b_1 is nearest 0, so values increase from b_m to b_1
      std::vector<int> c;
      for (int j = m; j >= 1; --j) c.push_back(n + j - 1);
      sys.chains.push_back(c);
    }
    return sys;
  }
  if (spec.kind == FamilyKind::KMR_A || spec.kind == FamilyKind::KMR_B) {
    sys.variables = {{"a", 1}};
    return sys;
  }
  const int na = detail::parallelACount(spec);
  sys.variables = detail::namedRange("a", na, 1);
  if (na > 1) sys.chains.push_back(detail::iota(0, na));
  if (detail::hasFreeB(spec.kind)) sys.variables.push_back({"b", -1});
  return sys;
}

inline std::vector<std::string> variableNames(const FamilySpec& spec) {
  std::vector<std::string> out;
  for (const auto& v : variableLayout(spec).variables) out.push_back(v.name);
  return out;
}

inline int variableIndex(const FamilySpec& spec, const std::string& name) {
  const auto names = variableNames(spec);
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("family " + describe(spec) + " has no variable '" + name + "'");
  return static_cast<int>(it - names.begin());
}

/// The variable held fixed when solving, or nullopt for square systems.
inline std::optional<std::string> defaultPin(const FamilySpec& spec) {
  if (spec.kind == FamilyKind::KMR_A || spec.kind == FamilyKind::KMR_B) return std::string("a");
  if (isParallel(spec.kind)) return std::string("a1");
  return std::nullopt;
}

/// Throws DomainError naming the first violated inequality.
inline void checkOrdering(const PeriodSystem& layout, const std::vector<PrecReal>& params) {
  if (params.size() != layout.variables.size())
    throw DomainError("expected " + std::to_string(layout.variables.size()) + " parameters, got " +
                      std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& v = layout.variables[i];
    const auto& x = params[i];
    if (v.sign > 0 && !(x > 0L && x < 1L)) throw DomainError("0 < " + v.name + " < 1 violated");
    if (v.sign < 0 && !(x > -1L && x < 0L)) throw DomainError("-1 < " + v.name + " < 0 violated");
  }
  for (const auto& chain : layout.chains) {
    for (size_t k = 1; k < chain.size(); ++k) {
      const int i = chain[k - 1], j = chain[k];
      if (!(params[i] < params[j]))
        throw DomainError(layout.variables[i].name + " < " + layout.variables[j].name + " violated");
    }
  }
}

namespace detail {

// the handle offsets alternate in sign: -pi, +pi, -pi, ...
inline PrecReal alternatingPi(int k, Precision p) {
  PrecReal v = pi(p);
  return (k % 2 == 1) ? -v : v;
}

inline PeriodEquation gapEquation(const BranchDivisor& d, const PrecReal& lo, const PrecReal& hi, FormKind form,
                                  PrecReal target, std::string label) {
  PeriodEquation e;
  e.segment = makeSegment(d, lo, hi);
  e.form = form;
  e.target = std::move(target);
  e.label = std::move(label);
  return e;
}

inline std::string gapLabel(FormKind f, const std::string& lo, const std::string& hi) {
  return std::string(toString(f)) + " on (" + lo + ", " + hi + ")";
}

inline FamilyInstance instantiateTypeMN(const FamilySpec& spec, int m, int n, const std::vector<PrecReal>& x,
                                        Precision p) {
  auto roleAt = [](int idx) { return idx % 2 == 0 ? Role::NUM : Role::DEN; };
  std::vector<BranchPoint> pos, neg;
  for (int i = 1; i <= n; ++i) {
    const Role r = roleAt(i - 1);
    pos.push_back({x[i - 1], r, r});
  }
  const Role plusOne = roleAt(n);
  const Role minusOne = roleAt(2 * n + 1 + m);
  // b_m .. b_1 in increasing order
  for (int j = m; j >= 1; --j) {
    const Role r = roleAt(2 * n + j);
    neg.push_back({x[n + j - 1], r, r});
  }
  BranchDivisor d(p, pos, neg, plusOne, minusOne);
  FamilyInstance inst;
  inst.spec = spec;
  inst.wd = makeWeierstrassData(std::move(d), EndAngle::ORTHOGONAL, m + n, p);
  inst.system = variableLayout(spec);
  const auto& dv = inst.wd.divisor;
  const PrecReal one(1L, p), minusOneV(-1L, p);
  auto addGap = [&](const PrecReal& lo, const PrecReal& hi, const std::string& ln, const std::string& hn) {
    Segment s = makeSegment(dv, lo, hi);
    const FormKind f = realForm(dv, s);
    inst.system.equations.push_back(gapEquation(dv, lo, hi, f, PrecReal(0L, p), gapLabel(f, ln, hn)));
  };
  for (int i = 1; i <= n; ++i) {
    if (i < n) addGap(x[i - 1], x[i], "a" + std::to_string(i), "a" + std::to_string(i + 1));
    else addGap(x[i - 1], one, "a" + std::to_string(i), "1");
  }
  for (int j = m; j >= 1; --j) {
    if (j == m) addGap(minusOneV, x[n + j - 1], "-1", "b" + std::to_string(j));
    if (j > 1) addGap(x[n + j - 1], x[n + j - 2], "b" + std::to_string(j), "b" + std::to_string(j - 1));
  }
  return inst;
}

inline FamilyInstance instantiateKMR(const FamilySpec& spec, const std::vector<PrecReal>& x, Precision p) {
  const PrecReal& a = x[0];
  std::vector<BranchPoint> pos, neg;
  if (spec.kind == FamilyKind::KMR_A) {
    // (z + 1/a)(z - a) / ((z + a)(z - 1/a))
    pos.push_back({a, Role::NUM, Role::DEN});
    neg.push_back({-a, Role::DEN, Role::NUM});
  } else {
    // (z - a)(z - 1/a) / ((z + a)(z + 1/a))
    pos.push_back({a, Role::NUM, Role::NUM});
    neg.push_back({-a, Role::DEN, Role::DEN});
  }
  FamilyInstance inst;
  inst.spec = spec;
  inst.wd = makeWeierstrassData(BranchDivisor(p, pos, neg), EndAngle::PARALLEL, 1, p);
  inst.system = variableLayout(spec);
  return inst;
}

inline FamilyInstance instantiateParallel(const FamilySpec& spec, const std::vector<PrecReal>& x, Precision p) {
  const int na = parallelACount(spec);
  const int blocks = spec.kind == FamilyKind::RTW2 ? 0 : spec.n;
  std::vector<PrecReal> a(x.begin(), x.begin() + na);
  FamilyInstance inst;
  inst.spec = spec;
  std::vector<BranchPoint> pos, neg;
  const bool paired = hasFreeB(spec.kind);
  // blocks: two zeros then two poles; the 4n and 4n+2 kinds flip the role of
  // each inverse partner, the 4n+1 and 4n+3 kinds keep it
  for (int k = 1; k <= blocks; ++k) {
    for (int t = 0; t < 4; ++t) {
      const Role r = t < 2 ? Role::NUM : Role::DEN;
      const Role partner = paired ? r : (r == Role::NUM ? Role::DEN : Role::NUM);
      pos.push_back({a[4 * k - 4 + t], r, partner});
    }
  }
  PrecReal b;
  switch (spec.kind) {
    case FamilyKind::PAR_4N:
      b = *closeEndConstraint(spec, a);
      neg.push_back({b, Role::DEN, Role::NUM});
      break;
    case FamilyKind::RTW2:
    case FamilyKind::PAR_4N2:
      pos.push_back({a[4 * blocks], Role::NUM, Role::DEN});
      pos.push_back({a[4 * blocks + 1], Role::NUM, Role::DEN});
      b = *closeEndConstraint(spec, a);
      neg.push_back({b, Role::DEN, Role::NUM});
      break;
    case FamilyKind::PAR_4N1:
      pos.push_back({a[4 * blocks], Role::NUM, Role::NUM});
      b = x[na];
      neg.push_back({b, Role::DEN, Role::DEN});
      break;
    case FamilyKind::PAR_4N3:
      pos.push_back({a[4 * blocks], Role::NUM, Role::NUM});
      pos.push_back({a[4 * blocks + 1], Role::NUM, Role::NUM});
      pos.push_back({a[4 * blocks + 2], Role::DEN, Role::DEN});
      b = x[na];
      neg.push_back({b, Role::DEN, Role::DEN});
      break;
    default:
      throw NotApplicableError("not a parallel family");
  }
  if (!(b > -1L && b < 0L)) throw DomainError("-1 < b < 0 violated (b = " + toString(b, 12) + ")");
  inst.wd = makeWeierstrassData(BranchDivisor(p, pos, neg), EndAngle::PARALLEL, genusOf(spec), p);
  if (!paired) inst.dependentB = b;
  inst.system = variableLayout(spec);
  const auto& dv = inst.wd.divisor;
  // handle gaps between consecutive a's: odd gaps carry +-pi on PHI2, even
  // gaps PHI1 = 0. For the paired kinds the handle values have the opposite
  // sign on this sheet.
  const int gaps = na - 1;
  for (int i = 1; i <= gaps; ++i) {
    const std::string ln = "a" + std::to_string(i), hn = "a" + std::to_string(i + 1);
    if (i % 2 == 1) {
      const int k = (i + 1) / 2;
      PrecReal target = alternatingPi(k, p);
      if (paired) target = -target;
      inst.system.equations.push_back(
          gapEquation(dv, a[i - 1], a[i], FormKind::PHI2, std::move(target), gapLabel(FormKind::PHI2, ln, hn)));
    } else {
      inst.system.equations.push_back(
          gapEquation(dv, a[i - 1], a[i], FormKind::PHI1, PrecReal(0L, p), gapLabel(FormKind::PHI1, ln, hn)));
    }
  }
  if (paired) {
    inst.system.equations.push_back(
        gapEquation(dv, 1 / b, b, FormKind::PHI2, pi(p), gapLabel(FormKind::PHI2, "1/b", "b")));
  }
  return inst;
}

}  // namespace detail

/// Builds the curve and period system at `params` (named per variableNames).
/// Throws DomainError when the ordering chain is violated.
inline FamilyInstance instantiate(const FamilySpec& spec, const std::vector<PrecReal>& params, Precision p) {
  const PeriodSystem layout = variableLayout(spec);
  checkOrdering(layout, params);
  std::vector<PrecReal> x;
  x.reserve(params.size());
  for (const auto& v : params) x.push_back(convert(v, p));
  FamilyInstance inst;
  int m = 0, n = 0;
  if (typeIndices(spec, m, n)) inst = detail::instantiateTypeMN(spec, m, n, x, p);
  else if (spec.kind == FamilyKind::KMR_A || spec.kind == FamilyKind::KMR_B) inst = detail::instantiateKMR(spec, x, p);
  else inst = detail::instantiateParallel(spec, x, p);
  inst.params = std::move(x);
  inst.system.pinned = defaultPin(spec);
  return inst;
}

/// Raw equation values: Re of each integral (before adding targets).
inline std::vector<PrecReal> equationValues(const FamilyInstance& inst, Precision p,
                                            const QuadratureOptions& opt = {}) {
  const auto& eqs = inst.system.equations;
  std::vector<PrecReal> out(eqs.size());
  parallelFor(eqs.size(), [&](size_t j) {
    const auto& e = eqs[j];
    const FormKind expected = realForm(inst.wd.divisor, e.segment);
    if (e.form != expected)
      throw NumericError("equation " + std::to_string(j) + " (" + e.label + "): template uses " + toString(e.form) +
                         " but the real form on this gap is " + toString(expected));
    PrecComplex v;
    try {
      v = periodIntegral(inst.wd, e.form, e.segment, p, opt);
    } catch (const QuadratureError& q) {
      throw QuadratureError("equation " + std::to_string(j) + " (" + e.label + ")", q.previousEstimate(),
                            q.lastEstimate());
    }
    const PrecReal tol = pow10(-(p.digits() / 2), p) * max(abs(v.re()), PrecReal(1L, p));
    if (abs(v.im()) > tol)
      throw NumericError("equation " + std::to_string(j) + " (" + e.label + "): imaginary part " +
                         toString(v.im(), 6) + " is not negligible");
    out[j] = std::move(v.re());
  });
  return out;
}

/// Entry j = value of equation j + its target.
inline std::vector<PrecReal> residualVector(const FamilyInstance& inst, Precision p, const QuadratureOptions& opt = {}) {
  auto vals = equationValues(inst, p, opt);
  for (size_t j = 0; j < vals.size(); ++j) vals[j] += convert(inst.system.equations[j].target, p);
  return vals;
}

inline PrecReal maxNorm(const std::vector<PrecReal>& v, Precision p) {
  PrecReal m(p);
  for (const auto& x : v) m = max(m, abs(x));
  return m;
}

namespace detail {

inline std::vector<PrecReal> parseAll(const std::vector<const char*>& s, Precision p) {
  std::vector<PrecReal> out;
  for (const char* t : s) out.emplace_back(std::string_view(t), p);
  return out;
}

// Geometric progression from lo to hi (count values, increasing).
inline std::vector<PrecReal> geometric(double lo, double hi, int count, Precision p) {
  std::vector<PrecReal> out;
  if (count == 1) {
    out.emplace_back(std::sqrt(lo * hi), p);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    out.emplace_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))), p);
  }
  return out;
}

}  // namespace detail

/// A legal starting point for the solver, scaled from the magnitudes of the
/// known solutions of each kind.
inline std::vector<PrecReal> defaultSeed(const FamilySpec& spec, Precision p) {
  validateSpec(spec);
  switch (spec.kind) {
    case FamilyKind::SCHERK0: return {};
    case FamilyKind::KMR_A:
    case FamilyKind::KMR_B: return detail::parseAll({"0.5"}, p);
    case FamilyKind::TYPE_2_2N:
      if (spec.n == 2) return detail::parseAll({"5e-6", "2e-4", "7e-4", "4e-3", "-7e-6", "-1e-3"}, p);
      break;
    case FamilyKind::TYPE_3_4:
      return detail::parseAll({"4e-13", "5e-7", "3e-3", "0.2", "-4e-13", "-5e-7", "-4e-3"}, p);
    case FamilyKind::TYPE_1_2N:
      if (spec.n == 3) return detail::parseAll({"2e-8", "5e-8", "2e-7", "8e-7", "2e-6", "0.3", "-2e-7"}, p);
      break;
    case FamilyKind::TYPE_2_2N1:
      if (spec.n == 2) return detail::parseAll({"1.85e-6", "1.19e-5", "3.99e-5", "1.22e-3", "0.243", "-4.36e-6", "-9.81e-4"}, p);
      break;
    case FamilyKind::RTW2: return detail::parseAll({"0.1", "0.5"}, p);
    case FamilyKind::PAR_4N2:
      if (spec.n == 1) return detail::parseAll({"1.04e-5", "8.5e-5", "3.39e-4", "6.12e-3", "2.86e-2", "0.465"}, p);
      break;
    default: break;
  }
  // generic: a's geometric in (0,1), b's geometric in (-1,0) with b_1 nearest 0
  const auto layout = variableLayout(spec);
  std::vector<PrecReal> out;
  int na = 0, nb = 0;
  for (const auto& v : layout.variables) (v.sign > 0 ? na : nb)++;
  if (isParallel(spec.kind)) {
    // a1 starts at the published pin where there is one
    const char* pin = nullptr;
    if (spec.n == 3 && spec.kind == FamilyKind::PAR_4N) pin = "1e-8";
    if (spec.n == 3 && spec.kind == FamilyKind::PAR_4N2) pin = "1e-12";
    if (spec.n == 3 && spec.kind == FamilyKind::PAR_4N3) pin = "5e-13";
    auto a = detail::geometric(pin ? std::atof(pin) : 1e-6, 0.45, na, p);
    if (pin) a[0] = PrecReal(std::string_view(pin), p);
    out.insert(out.end(), a.begin(), a.end());
    if (nb > 0) out.emplace_back(-1e-7, p);
    return out;
  }
  auto a = detail::geometric(0.05, 0.6, na, p);
  auto b = detail::geometric(0.05, 0.6, nb, p);
  out.insert(out.end(), a.begin(), a.end());
  for (const auto& v : b) out.push_back(-v);
  return out;
}

}  // namespace periodforge
