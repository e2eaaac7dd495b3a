#pragma once

#include <array>
#include <string>
#include <string_view>

#include "periodforge/errors.hpp"

namespace periodforge {

enum class FamilyKind {
  SCHERK0,
  KMR_A,
  KMR_B,
  WW_EVEN,
  WW_ODD,
  TYPE_1_2N,
  TYPE_2_2N,
  TYPE_2_2N1,
  TYPE_3_4,
  TYPE_M_N,
  RTW2,
  PAR_4N,
  PAR_4N1,
  PAR_4N2,
  PAR_4N3,
};

enum class EndAngle { ORTHOGONAL, PARALLEL, NEITHER };

inline std::string_view toString(EndAngle e) {
  switch (e) {
    case EndAngle::ORTHOGONAL: return "ORTHOGONAL";
    case EndAngle::PARALLEL: return "PARALLEL";
    case EndAngle::NEITHER: return "NEITHER";
  }
  return "?";
}

/// A family kind plus its index parameters. `n` is the family index for the
/// indexed kinds; TYPE_M_N uses both `m` and `n`.
struct FamilySpec {
  FamilyKind kind = FamilyKind::SCHERK0;
  int n = 0;
  int m = 0;

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

namespace detail {
struct KindName {
  FamilyKind kind;
  std::string_view name;
};
inline constexpr std::array<KindName, 15> kKindNames{{
    {FamilyKind::SCHERK0, "scherk0"},
    {FamilyKind::KMR_A, "kmr_a"},
    {FamilyKind::KMR_B, "kmr_b"},
    {FamilyKind::WW_EVEN, "ww_even"},
    {FamilyKind::WW_ODD, "ww_odd"},
    {FamilyKind::TYPE_1_2N, "type12n"},
    {FamilyKind::TYPE_2_2N, "type22n"},
    {FamilyKind::TYPE_2_2N1, "type22n1"},
    {FamilyKind::TYPE_3_4, "type34"},
    {FamilyKind::TYPE_M_N, "typemn"},
    {FamilyKind::RTW2, "rtw"},
    {FamilyKind::PAR_4N, "par4n"},
    {FamilyKind::PAR_4N1, "par4n1"},
    {FamilyKind::PAR_4N2, "par4n2"},
    {FamilyKind::PAR_4N3, "par4n3"},
}};
}  // namespace detail

inline std::string_view kindName(FamilyKind k) {
  for (const auto& e : detail::kKindNames)
    if (e.kind == k) return e.name;
  return "?";
}

inline FamilyKind parseKind(std::string_view name) {
  for (const auto& e : detail::kKindNames)
    if (e.name == name) return e.kind;
  throw ConfigError("unknown family '" + std::string(name) + "'");
}

inline bool isParallel(FamilyKind k) {
  switch (k) {
    case FamilyKind::KMR_A:
    case FamilyKind::KMR_B:
    case FamilyKind::RTW2:
    case FamilyKind::PAR_4N:
    case FamilyKind::PAR_4N1:
    case FamilyKind::PAR_4N2:
    case FamilyKind::PAR_4N3:
      return true;
    default:
      return false;
  }
}

inline EndAngle declaredEndAngle(FamilyKind k) {
  return isParallel(k) ? EndAngle::PARALLEL : EndAngle::ORTHOGONAL;
}

/// Kinds that are a (m,n) orthogonal template in disguise, reduced to (m,n).
/// Returns false for the parallel kinds.
inline bool typeIndices(const FamilySpec& s, int& m, int& n) {
  switch (s.kind) {
    case FamilyKind::SCHERK0: m = 0; n = 0; return true;
    case FamilyKind::WW_EVEN: m = 0; n = 2 * s.n; return true;
    case FamilyKind::WW_ODD: m = 0; n = 2 * s.n + 1; return true;
    case FamilyKind::TYPE_1_2N: m = 1; n = 2 * s.n; return true;
    case FamilyKind::TYPE_2_2N: m = 2; n = 2 * s.n; return true;
    case FamilyKind::TYPE_2_2N1: m = 2; n = 2 * s.n + 1; return true;
    case FamilyKind::TYPE_3_4: m = 3; n = 4; return true;
    case FamilyKind::TYPE_M_N: m = s.m; n = s.n; return true;
    default: return false;
  }
}

inline void validateSpec(const FamilySpec& s) {
  if (s.n < 0 || s.m < 0) throw ConfigError("family indices must be nonnegative");
  switch (s.kind) {
    case FamilyKind::WW_EVEN:
    case FamilyKind::TYPE_1_2N:
    case FamilyKind::TYPE_2_2N:
    case FamilyKind::PAR_4N:
      if (s.n < 1) throw ConfigError(std::string(kindName(s.kind)) + " needs n >= 1");
      break;
    default:
      break;
  }
}

inline int genusOf(const FamilySpec& s) {
  int m = 0, n = 0;
  if (typeIndices(s, m, n)) return m + n;
  switch (s.kind) {
    case FamilyKind::KMR_A:
    case FamilyKind::KMR_B: return 1;
    case FamilyKind::RTW2: return 2;
    case FamilyKind::PAR_4N: return 4 * s.n;
    case FamilyKind::PAR_4N1: return 4 * s.n + 1;
    case FamilyKind::PAR_4N2: return 4 * s.n + 2;
    case FamilyKind::PAR_4N3: return 4 * s.n + 3;
    default: return 0;
  }
}

inline std::string describe(const FamilySpec& s) {
  std::string out(kindName(s.kind));
  if (s.kind == FamilyKind::TYPE_M_N) return out + "(" + std::to_string(s.m) + "," + std::to_string(s.n) + ")";
  switch (s.kind) {
    case FamilyKind::SCHERK0:
    case FamilyKind::KMR_A:
    case FamilyKind::KMR_B:
    case FamilyKind::TYPE_3_4:
    case FamilyKind::RTW2:
      return out;
    default:
      return out + "(" + std::to_string(s.n) + ")";
  }
}

}  // namespace periodforge
