#pragma once

// The hyperelliptic curve w^2 = prod (z - p)^(+-1), Gauss map G = w and
// height differential dh = dz/z.
//
// Boundary values on the real axis are taken from the lower half-plane with
// w > 0 on the unbounded positive segment. Each factor (z - p)^(e/2) with p to
// the right of x then contributes a phase of i^(-e), so on a gap between
// branch locations w = i^k sqrt|w^2| with k fixed for the whole gap.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "periodforge/errors.hpp"
#include "periodforge/family_spec.hpp"
#include "periodforge/numerics.hpp"

namespace periodforge {

enum class Role { NUM, DEN };

inline int exponentOf(Role r) { return r == Role::NUM ? 1 : -1; }
inline const char* toString(Role r) { return r == Role::NUM ? "NUM" : "DEN"; }

/// A branch location inside (-1,1), optionally paired with 1/location.
struct BranchPoint {
  PrecReal location;
  Role role = Role::NUM;
  std::optional<Role> partner;  // role of 1/location, if present
};

/// One simple zero (exponent +1) or pole (exponent -1) of w^2.
struct Factor {
  PrecReal location;
  int exponent = 1;
};

class BranchDivisor {
 public:
  BranchDivisor() = default;

  /// positive: strictly increasing in (0,1); negative: strictly increasing in
  /// (-1,0). plusOne / minusOne give the roles of z = +1 / -1 when those are
  /// branch locations. Throws DomainError on any violated invariant.
  BranchDivisor(Precision p, std::vector<BranchPoint> positive, std::vector<BranchPoint> negative,
                std::optional<Role> plusOne = std::nullopt, std::optional<Role> minusOne = std::nullopt)
      : bits_(p.bits()),
        positive_(std::move(positive)),
        negative_(std::move(negative)),
        plusOne_(plusOne),
        minusOne_(minusOne) {
    for (size_t i = 0; i < positive_.size(); ++i) {
      const auto& x = positive_[i].location;
      if (!(x > 0L) || !(x < 1L))
        throw DomainError("positive branch location " + toString(x, 12) + " outside (0,1)");
      if (i > 0 && !(positive_[i - 1].location < x))
        throw DomainError("positive branch locations not strictly increasing at index " + std::to_string(i));
    }
    for (size_t i = 0; i < negative_.size(); ++i) {
      const auto& x = negative_[i].location;
      if (!(x > -1L) || !(x < 0L))
        throw DomainError("negative branch location " + toString(x, 12) + " outside (-1,0)");
      if (i > 0 && !(negative_[i - 1].location < x))
        throw DomainError("negative branch locations not strictly increasing at index " + std::to_string(i));
    }
    expand();
  }

  const std::vector<BranchPoint>& positivePoints() const { return positive_; }
  const std::vector<BranchPoint>& negativePoints() const { return negative_; }
  std::optional<Role> plusOne() const { return plusOne_; }
  std::optional<Role> minusOne() const { return minusOne_; }

  /// Every branch location with its exponent, sorted increasingly.
  const std::vector<Factor>& factors() const { return factors_; }

  int genus() const { return static_cast<int>(factors_.size()) / 2 - 1; }
  mpfr_prec_t bits() const { return bits_; }
  Precision precision() const { return Precision(std::max(static_cast<int>((bits_ - Precision::kGuardBits) / 3.321928094887362), Precision::kMinDigits)); }

  bool isBranchLocation(const PrecReal& x) const {
    return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.location == x; });
  }

  /// True when 1/p is a branch location for every branch location p.
  bool closedUnderInversion() const {
    const Precision p = precision();
    const PrecReal tol = pow10(-(p.digits() - 5), p);
    for (const auto& f : factors_) {
      const PrecReal inv = 1 / f.location;
      const bool found = std::any_of(factors_.begin(), factors_.end(),
                                     [&](const Factor& g) { return abs(g.location - inv) <= abs(inv) * tol; });
      if (!found) return false;
    }
    return true;
  }

 private:
  void expand() {
    factors_.clear();
    auto add = [&](const PrecReal& x, Role r) { factors_.push_back({x, exponentOf(r)}); };
    for (const auto& p : positive_) {
      add(p.location, p.role);
      if (p.partner) add(1 / p.location, *p.partner);
    }
    for (const auto& p : negative_) {
      add(p.location, p.role);
      if (p.partner) add(1 / p.location, *p.partner);
    }
    if (plusOne_) factors_.push_back({PrecReal::constant(1, bits_), exponentOf(*plusOne_)});
    if (minusOne_) factors_.push_back({PrecReal::constant(-1, bits_), exponentOf(*minusOne_)});
    std::sort(factors_.begin(), factors_.end(), [](const Factor& a, const Factor& b) { return a.location < b.location; });
    for (size_t i = 1; i < factors_.size(); ++i) {
      if (factors_[i - 1].location == factors_[i].location)
        throw DomainError("branch location " + toString(factors_[i].location, 12) + " appears twice");
    }
    int balance = 0;
    for (const auto& f : factors_) balance += f.exponent;
    if (balance != 0) throw DomainError("numerator and denominator factor counts differ");
  }

  mpfr_prec_t bits_ = 0;
  std::vector<BranchPoint> positive_;
  std::vector<BranchPoint> negative_;
  std::optional<Role> plusOne_;
  std::optional<Role> minusOne_;
  std::vector<Factor> factors_;
};

struct SymmetryGroup {
  bool tau1 = true;  // (z,w) -> (z,-w)
  bool tau2 = true;  // (z,w) -> (conj z, conj w)
  bool tau3 = false; // (z,w) -> (1/z, w or iw)
};

struct WeierstrassData {
  BranchDivisor divisor;
  EndAngle endAngle = EndAngle::ORTHOGONAL;
  int genus = 0;
  SymmetryGroup symmetry;
};

/// The rational product defining w^2 at complex z.
inline PrecComplex wSquared(const BranchDivisor& d, const PrecComplex& z) {
  PrecComplex num = PrecComplex::constant(1, d.bits());
  PrecComplex den = num;
  for (const auto& f : d.factors()) {
    PrecComplex t = z - f.location;
    if (f.exponent < 0) {
      if (t.re().isZero() && t.im().isZero())
        throw PoleError("w^2 has a pole at z = " + toString(f.location, 17));
      den *= t;
    } else {
      num *= t;
    }
  }
  return num / den;
}

/// Limit of w^2 as z -> infinity; the factor counts balance, so it is 1.
inline PrecComplex wSquaredAtInfinity(const BranchDivisor&, Precision p) {
  return PrecComplex(PrecReal(1L, p), PrecReal(0L, p));
}

/// Quarter-turn count k with w = i^k |w| on the real gap whose right end is
/// `right` (all branch locations >= right lie to the right of the gap).
inline int axisPhase(const BranchDivisor& d, const PrecReal& right) {
  int k = 0;
  for (const auto& f : d.factors())
    if (f.location >= right) k -= f.exponent;
  return ((k % 4) + 4) % 4;
}

/// i^k as a complex number at precision p.
inline PrecComplex iPower(int k, Precision p) {
  static constexpr int re[4] = {1, 0, -1, 0};
  static constexpr int im[4] = {0, 1, 0, -1};
  k = ((k % 4) + 4) % 4;
  return {PrecReal(static_cast<long>(re[k]), p), PrecReal(static_cast<long>(im[k]), p)};
}

/// w at a real point that is not a branch location, on the sheet fixed above.
inline PrecComplex wOnAxis(const BranchDivisor& d, const PrecReal& x) {
  PrecReal num = PrecReal::constant(1, d.bits());
  PrecReal den = num;
  int k = 0;
  for (const auto& f : d.factors()) {
    PrecReal t = x - f.location;
    if (t.isZero()) throw BranchPointError("w evaluated at branch location " + toString(f.location, 17));
    if (t.sign() < 0) k -= f.exponent;
    if (f.exponent > 0) num *= abs(t);
    else den *= abs(t);
  }
  PrecReal s = sqrt(num / den);
  PrecComplex ph = iPower(k, d.precision());
  return {ph.re() * s, ph.im() * s};
}

/// Branch of w continuous on the open upper half-plane, with w > 0 for large
/// positive real z. It is the conjugate-sheet image of the axis convention.
inline PrecComplex wUpper(const BranchDivisor& d, const PrecComplex& z) {
  PrecComplex num = PrecComplex::constant(1, d.bits());
  PrecComplex den = num;
  for (const auto& f : d.factors()) {
    PrecComplex t = sqrt(z - f.location);
    if (f.exponent > 0) num *= t;
    else den *= t;
  }
  return num / den;
}

struct EndGaussValues {
  PrecComplex gZero;  // one of the two values of G at z = 0
  PrecComplex gInf;   // one of the two values of G at z = infinity
  EndAngle endAngle = EndAngle::NEITHER;
};

inline EndGaussValues endGaussValues(const BranchDivisor& d, Precision p) {
  PrecComplex zero(PrecReal(0L, p), PrecReal(0L, p));
  PrecComplex w2 = wSquared(d, zero);
  EndGaussValues out{sqrt(w2), sqrt(wSquaredAtInfinity(d, p)), EndAngle::NEITHER};
  const PrecReal tol = pow10(-(p.digits() - 5), p);
  const PrecReal one(1L, p);
  if (abs(w2.im()) <= tol) {
    if (abs(w2.re() + one) <= tol) {
      out.endAngle = EndAngle::ORTHOGONAL;
      out.gZero = PrecComplex(PrecReal(0L, p), one);
    } else if (abs(w2.re() - one) <= tol) {
      out.endAngle = EndAngle::PARALLEL;
      out.gZero = PrecComplex(one, PrecReal(0L, p));
    }
  }
  return out;
}

/// The dependent b that makes w^2(0) = 1 for the parallel families that have
/// one. Families whose paired factors already cancel at 0 return nullopt and b
/// stays free. `a` holds a_1, a_2, ... in order.
inline std::optional<PrecReal> closeEndConstraint(const FamilySpec& spec, const std::vector<PrecReal>& a) {
  auto blockProduct = [&](int blocks) {
    if (static_cast<int>(a.size()) < 4 * blocks) throw DomainError("too few a parameters for the family");
    PrecReal prod = PrecReal::constant(1, a.empty() ? 64 : a[0].bits());
    for (int k = 1; k <= blocks; ++k) {
      prod *= a[4 * k - 4];
      prod *= a[4 * k - 3];
      prod /= a[4 * k - 2];
      prod /= a[4 * k - 1];
    }
    return prod;
  };
  switch (spec.kind) {
    case FamilyKind::PAR_4N:
      return -blockProduct(spec.n);
    case FamilyKind::PAR_4N2:
    case FamilyKind::RTW2: {
      const int n = spec.kind == FamilyKind::RTW2 ? 0 : spec.n;
      if (static_cast<int>(a.size()) < 4 * n + 2) throw DomainError("too few a parameters for the family");
      return -(blockProduct(n) * a[4 * n] * a[4 * n + 1]);
    }
    case FamilyKind::PAR_4N1:
    case FamilyKind::PAR_4N3:
      return std::nullopt;
    default:
      throw NotApplicableError(std::string(kindName(spec.kind)) + " has no dependent-b rule");
  }
}

/// Builds WeierstrassData and checks the declared end class and genus.
inline WeierstrassData makeWeierstrassData(BranchDivisor d, EndAngle declared, int genus, Precision p) {
  if (d.genus() != genus)
    throw DomainError("divisor genus " + std::to_string(d.genus()) + " differs from declared genus " +
                      std::to_string(genus));
  const auto ends = endGaussValues(d, p);
  if (ends.endAngle != declared)
    throw DomainError(std::string("end class ") + std::string(toString(ends.endAngle)) + " differs from declared " +
                      std::string(toString(declared)));
  WeierstrassData wd;
  wd.divisor = std::move(d);
  wd.endAngle = declared;
  wd.genus = genus;
  return wd;
}

/// Enables tau3; only legal when the divisor is closed under x -> 1/x.
inline void enableTau3(WeierstrassData& wd) {
  if (!wd.divisor.closedUnderInversion()) throw DomainError("tau3 needs a divisor closed under x -> 1/x");
  wd.symmetry.tau3 = true;
}

}  // namespace periodforge
