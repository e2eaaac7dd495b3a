#pragma once

// Immersion, lattice periods, triangulated fundamental domains and developed
// flat structures for solved Weierstrass data.
//
// Sheets: the principal product for w (wUpper) is analytic off the real axis.
// On the upper half-plane it is the fundamental piece; evaluated on the lower
// half-plane it gives the tau2 image conj(w(conj z)). Real-axis integrals come
// from the gap quadrature, which uses lower-side boundary values; upper-side
// values are their conjugates (with the sign change that i carries in phi2).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "periodforge/curve.hpp"
#include "periodforge/errors.hpp"
#include "periodforge/families.hpp"
#include "periodforge/parallel.hpp"
#include "periodforge/quadrature.hpp"

namespace periodforge {

using Vec3 = std::array<PrecReal, 3>;
// integrals of (phi1, phi2, phi3)
using Forms3 = std::array<PrecComplex, 3>;

struct ImmersionPoint {
  PrecComplex z;
  Vec3 xyz;
};

struct LatticePeriods {
  Vec3 T1;
  Vec3 T2;
};

namespace detail {

inline PrecComplex zeroC(Precision p) { return PrecComplex(PrecReal(p), PrecReal(p)); }
inline Forms3 zeroForms(Precision p) { return {zeroC(p), zeroC(p), zeroC(p)}; }

inline void addTo(Forms3& acc, const Forms3& v) {
  for (int k = 0; k < 3; ++k) acc[k] += v[k];
}

inline Forms3 negated(Forms3 v) {
  for (auto& c : v) c = -c;
  return v;
}

inline Vec3 realParts(const Forms3& v) { return {v[0].re(), v[1].re(), v[2].re()}; }

// a zero imaginary part takes the sign of the side it is a limit from
inline void setZeroSide(PrecReal& x, int side) {
  if (x.isZero()) mpfr_setsign(x.raw(), x.raw(), side < 0 ? 1 : 0, MPFR_RNDN);
}

// (phi1, phi2, phi3) divided by dz/z, for a given value of G = w
inline Forms3 formCoefficients(const PrecComplex& w, Precision p) {
  const PrecComplex inv = PrecComplex::constant(1, w.bits()) / w;
  const PrecReal two(2L, p);
  return {(inv - w) / two, timesI(inv + w) / two, PrecComplex(PrecReal(1L, p), PrecReal(p))};
}

template <class F>
PrecComplex integrateComplex(const PrecReal& length, F&& f, Precision p, const QuadratureOptions& opt) {
  auto r = integrateOffsets<2>(
      length,
      [&](const PrecReal& lo, const PrecReal& hi) {
        PrecComplex v = f(lo, hi);
        return std::array<PrecReal, 2>{v.re(), v.im()};
      },
      p, opt);
  return {r[0], r[1]};
}

template <class F>
Forms3 integrateForms(const PrecReal& length, F&& f, Precision p, const QuadratureOptions& opt) {
  auto r = integrateOffsets<6>(
      length,
      [&](const PrecReal& lo, const PrecReal& hi) {
        Forms3 v = f(lo, hi);
        return std::array<PrecReal, 6>{v[0].re(), v[0].im(), v[1].re(), v[1].im(), v[2].re(), v[2].im()};
      },
      p, opt);
  return {PrecComplex(r[0], r[1]), PrecComplex(r[2], r[3]), PrecComplex(r[4], r[5])};
}

inline PrecComplex wFromDiffs(const BranchDivisor& d, const std::vector<PrecComplex>& diffs) {
  PrecComplex num = PrecComplex::constant(1, d.bits());
  PrecComplex den = num;
  const auto& fs = d.factors();
  for (size_t k = 0; k < fs.size(); ++k) {
    PrecComplex t = sqrt(diffs[k]);
    if (fs[k].exponent > 0) num *= t;
    else den *= t;
  }
  return num / den;
}

inline bool sameRealPoint(const PrecComplex& z, const PrecReal& x) { return z.im().isZero() && z.re() == x; }

// Straight segment za -> zb; w is the principal product times `sheet`. Where
// the segment runs along the axis, `side` picks the boundary values. Factors
// sitting at an endpoint use the parameter offset directly, so a branch point
// endpoint costs no accuracy.
inline Forms3 straightIntegral(const BranchDivisor& d, const PrecComplex& za, const PrecComplex& zb, int sheet,
                               int side, Precision p, const QuadratureOptions& opt) {
  const PrecComplex delta = zb - za;
  const auto& fs = d.factors();
  std::vector<int> at(fs.size(), 0);
  for (size_t k = 0; k < fs.size(); ++k) {
    if (sameRealPoint(za, fs[k].location)) at[k] = -1;
    else if (sameRealPoint(zb, fs[k].location)) at[k] = 1;
  }
  return integrateForms(
      PrecReal(1L, p),
      [&](const PrecReal& tlo, const PrecReal& thi) {
        PrecComplex z = tlo < thi ? za + delta * tlo : zb - delta * thi;
        setZeroSide(z.im(), side);
        std::vector<PrecComplex> diffs;
        diffs.reserve(fs.size());
        for (size_t k = 0; k < fs.size(); ++k) {
          PrecComplex df = at[k] < 0 ? delta * tlo : at[k] > 0 ? -(delta * thi) : z - fs[k].location;
          setZeroSide(df.im(), side);
          diffs.push_back(std::move(df));
        }
        PrecComplex w = wFromDiffs(d, diffs);
        if (sheet < 0) w = -w;
        Forms3 c = formCoefficients(w, p);
        const PrecComplex jac = delta / z;
        for (auto& v : c) v = v * jac;
        return c;
      },
      p, opt);
}

inline constexpr int kMaxRefinements = 5;

// Splits the segment in halves on quadrature failure, at most five times deep.
inline Forms3 straightIntegralRefined(const BranchDivisor& d, const PrecComplex& za, const PrecComplex& zb, int sheet,
                                      int side, Precision p, const QuadratureOptions& opt, int depth = 0) {
  try {
    return straightIntegral(d, za, zb, sheet, side, p, opt);
  } catch (const QuadratureError&) {
    if (depth >= kMaxRefinements) throw;
    const PrecComplex mid = (za + zb) / PrecReal(2L, p);
    Forms3 a = straightIntegralRefined(d, za, mid, sheet, side, p, opt, depth + 1);
    addTo(a, straightIntegralRefined(d, mid, zb, sheet, side, p, opt, depth + 1));
    return a;
  }
}

// Curve t -> z(t) on [t0, t1] off the real axis; param returns z and dz/(z dt).
template <class Param, class WFun>
Forms3 curveIntegral(const PrecReal& t0, const PrecReal& t1, const Param& param, const WFun& wfun, Precision p,
                     const QuadratureOptions& opt, int depth = 0) {
  if (t1 < t0) return negated(curveIntegral(t1, t0, param, wfun, p, opt, depth));
  try {
    return integrateForms(
        t1 - t0,
        [&](const PrecReal& lo, const PrecReal& hi) {
          const PrecReal t = lo < hi ? t0 + lo : t1 - hi;
          auto [z, jac] = param(t);
          Forms3 c = formCoefficients(wfun(z), p);
          for (auto& v : c) v = v * jac;
          return c;
        },
        p, opt);
  } catch (const QuadratureError&) {
    if (depth >= kMaxRefinements) throw;
    const PrecReal mid = (t0 + t1) / PrecReal(2L, p);
    Forms3 a = curveIntegral(t0, mid, param, wfun, p, opt, depth + 1);
    addTo(a, curveIntegral(mid, t1, param, wfun, p, opt, depth + 1));
    return a;
  }
}

// Boundary values from the upper side, given lower-side integrals.
inline Forms3 upperFromLower(Forms3 v) {
  v[0] = conj(v[0]);
  v[1] = -conj(v[1]);
  return v;
}

// Integral along the real axis from x0 to x1 (same sign), split at branch
// locations; side > 0 gives upper-half-plane boundary values.
inline Forms3 axisIntegral(const WeierstrassData& wd, const PrecReal& x0, const PrecReal& x1, int side, Precision p,
                           const QuadratureOptions& opt) {
  if (x0 == x1) return zeroForms(p);
  const PrecReal lo = min(x0, x1);
  const PrecReal hi = max(x0, x1);
  std::vector<PrecReal> cuts{lo};
  for (const auto& f : wd.divisor.factors())
    if (f.location > lo && f.location < hi) cuts.push_back(f.location);
  cuts.push_back(hi);
  Forms3 sum = zeroForms(p);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Segment seg = makeSegment(wd.divisor, cuts[i], cuts[i + 1]);
    auto all = periodIntegralsAll(wd, seg, p, opt);
    addTo(sum, {all[0], all[1], all[2]});
  }
  if (side > 0) sum = upperFromLower(std::move(sum));
  return x1 < x0 ? negated(std::move(sum)) : sum;
}

// G is imaginary on the axis at x (x not a branch location).
inline bool imaginaryGap(const BranchDivisor& d, const PrecReal& x) {
  int k = 0;
  for (const auto& f : d.factors())
    if (f.location > x) k += f.exponent;
  return (k % 2) != 0;
}

inline double minAbsLocation(const BranchDivisor& d) {
  double m = 1.0;
  for (const auto& f : d.factors()) m = std::min(m, std::abs(f.location.toDouble()));
  return m;
}

inline double maxAbsLocation(const BranchDivisor& d) {
  double m = 1.0;
  for (const auto& f : d.factors()) m = std::max(m, std::abs(f.location.toDouble()));
  return m;
}

inline constexpr double kClearance = 1e-12;

inline void checkClearance(const BranchDivisor& d, const std::vector<PrecComplex>& path) {
  using C = std::complex<double>;
  struct Singular {
    C q;
    const PrecReal* exact;  // null for z = 0
    double radius;
  };
  std::vector<Singular> sing;
  for (const auto& f : d.factors())
    sing.push_back({C(f.location.toDouble(), 0.0), &f.location, kClearance * std::abs(f.location.toDouble())});
  sing.push_back({C(0.0, 0.0), nullptr, kClearance * minAbsLocation(d)});
  auto toC = [](const PrecComplex& z) { return C(z.re().toDouble(), z.im().toDouble()); };
  for (size_t k = 0; k < path.size(); ++k) {
    const C a = toC(path[k]);
    const C b = k + 1 < path.size() ? toC(path[k + 1]) : a;
    for (const auto& s : sing) {
      const C ab = b - a;
      const double len2 = std::norm(ab);
      double t = len2 > 0 ? std::clamp(std::real((s.q - a) * std::conj(ab)) / len2, 0.0, 1.0) : 0.0;
      const double dist = std::abs(a + t * ab - s.q);
      if (dist >= s.radius) continue;
      // a path may start or end exactly on a branch point
      if (s.exact && t == 0.0 && sameRealPoint(path[k], *s.exact)) continue;
      if (s.exact && t == 1.0 && k + 1 < path.size() && sameRealPoint(path[k + 1], *s.exact)) continue;
      std::ostringstream os;
      os << "path passes within clearance of singular point z = " << s.q.real();
      throw DomainError(os.str());
    }
  }
}

inline PrecReal roundToInteger(const PrecReal& x) {
  PrecReal r = x;
  mpfr_round(r.raw(), x.raw());
  return r;
}

}  // namespace detail

/// Re of the integrals of (phi1, phi2, phi3) along a polyline starting at
/// z0 = path.front(). Crossing the real axis through a gap where G is
/// imaginary moves to the other sheet, so closed loops are handled. The path
/// may start or end on a branch point; elsewhere it must keep a clearance.
inline ImmersionPoint immerse(const WeierstrassData& wd, const std::vector<PrecComplex>& path, Precision p,
                              const QuadratureOptions& opt = {}) {
  if (path.empty()) throw ConfigError("immersion path is empty");
  const auto& d = wd.divisor;
  detail::checkClearance(d, path);
  int side = path.front().im().sign() < 0 ? -1 : 1;
  int sheet = 1;
  Forms3 acc = detail::zeroForms(p);
  auto runPiece = [&](const PrecComplex& u, const PrecComplex& v) {
    const PrecReal midIm = (u.im() + v.im()) / PrecReal(2L, p);
    const int pieceSide = midIm.sign() == 0 ? side : midIm.sign();
    if (pieceSide != side) {
      if (detail::imaginaryGap(d, u.re())) sheet = -sheet;
      side = pieceSide;
    }
    detail::addTo(acc, detail::straightIntegralRefined(d, u, v, sheet, side, p, opt));
  };
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    const PrecComplex& za = path[k];
    const PrecComplex& zb = path[k + 1];
    if (za.im().sign() * zb.im().sign() < 0) {
      const PrecReal t = za.im() / (za.im() - zb.im());
      PrecComplex x(za.re() + (zb.re() - za.re()) * t, PrecReal(p));
      runPiece(za, x);
      runPiece(x, zb);
    } else {
      runPiece(za, zb);
    }
  }
  return {path.back(), detail::realParts(acc)};
}

namespace detail {

// Period of (phi1, phi2, phi3) around a small circle about z = 0, or a large
// one about infinity, on the sheet continuing the upper half-plane piece.
inline Vec3 endPeriod(const WeierstrassData& wd, bool atZero, Precision p, const QuadratureOptions& opt) {
  const auto& d = wd.divisor;
  const PrecReal r = atZero ? PrecReal(minAbsLocation(d) / 2, p) : PrecReal(maxAbsLocation(d) * 2, p);
  const PrecComplex one = PrecComplex::constant(1, Precision(p).bits());
  // w = g * prod sqrt(1 - z/q)^e near 0, or prod sqrt(1 - q/z)^e near infinity
  auto local = [&](const PrecComplex& z) {
    PrecComplex num = one, den = one;
    for (const auto& f : d.factors()) {
      PrecComplex t = atZero ? one - z / PrecComplex(f.location, PrecReal(p)) : one - PrecComplex(f.location, PrecReal(p)) / z;
      t = sqrt(t);
      if (f.exponent > 0) num *= t;
      else den *= t;
    }
    return num / den;
  };
  PrecComplex g = atZero ? sqrt(wSquared(d, zeroC(p))) : one;
  const PrecComplex probe(PrecReal(p), r);
  if ((g * local(probe) * conj(wUpper(d, probe))).re() < 0L) g = -g;
  const Forms3 v = curveIntegral(
      PrecReal(p), pi(p) * 2L,
      [&](const PrecReal& th) { return std::make_pair(polar(r, th), PrecComplex::i(p)); },
      [&](const PrecComplex& z) { return g * local(z); }, p, opt);
  return realParts(v);
}

}  // namespace detail

namespace detail {

// Path from lo to hi through the upper half-plane. A gap on one side of 0 is
// followed on a log-spiral, a few vertices per decade, so no piece is long
// next to the singular points it passes.
inline std::vector<PrecComplex> upperArc(const PrecReal& lo, const PrecReal& hi, Precision p) {
  if (lo.sign() != hi.sign()) {
    const PrecReal half = (hi - lo) / PrecReal(2L, p);
    return {PrecComplex(lo, PrecReal(p)), PrecComplex(lo + half, half), PrecComplex(hi, PrecReal(p))};
  }
  const bool negative = lo.sign() < 0;
  const PrecReal u0 = log(abs(lo)), u1 = log(abs(hi));
  const double decades = std::abs((u1 - u0).toDouble()) / std::log(10.0);
  const int n = std::max(4, static_cast<int>(std::ceil(4 * decades)));
  const PrecReal alpha = pi(p) / 4L;
  std::vector<PrecComplex> path{PrecComplex(lo, PrecReal(p))};
  for (int k = 1; k < n; ++k) {
    const PrecReal t = PrecReal(static_cast<long>(k), p) / PrecReal(static_cast<long>(n), p);
    const PrecReal rad = exp(u0 + (u1 - u0) * t);
    const PrecReal lift = alpha * sin(pi(p) * t);
    const PrecReal theta = negative ? pi(p) - lift : lift;
    path.push_back(polar(rad, theta));
  }
  path.emplace_back(hi, PrecReal(p));
  return path;
}

}  // namespace detail

/// Horizontal periods. Orthogonal ends: the two end periods. Parallel ends:
/// the end period at 0 and the cycle around the gap that contains z = 0,
/// reduced against the first.
inline LatticePeriods latticePeriods(const WeierstrassData& wd, Precision p, const QuadratureOptions& opt = {}) {
  LatticePeriods L;
  L.T1 = detail::endPeriod(wd, true, p, opt);
  if (wd.endAngle != EndAngle::PARALLEL) {
    L.T2 = detail::endPeriod(wd, false, p, opt);
    return L;
  }
  std::optional<PrecReal> lo, hi;
  for (const auto& f : wd.divisor.factors()) {
    if (f.location.sign() < 0) lo = f.location;
    else if (!hi) hi = f.location;
  }
  if (!lo || !hi) throw DomainError("no gap around z = 0 to carry the second period");
  const PrecReal half = (*hi - *lo) / PrecReal(2L, p);
  const ImmersionPoint ip =
      immerse(wd, {PrecComplex(*lo, PrecReal(p)), PrecComplex(*lo + half, half), PrecComplex(*hi, PrecReal(p))}, p, opt);
  Vec3 t{ip.xyz[0] * 2L, ip.xyz[1] * 2L, PrecReal(p)};
  const PrecReal n1 = L.T1[0] * L.T1[0] + L.T1[1] * L.T1[1];
  const PrecReal k = detail::roundToInteger((t[0] * L.T1[0] + t[1] * L.T1[1]) / n1);
  for (int c = 0; c < 2; ++c) t[c] -= k * L.T1[c];
  L.T2 = std::move(t);
  return L;
}

/// Distance from v to the nearest point of the lattice spanned by T1, T2.
inline PrecReal latticeDistance(const LatticePeriods& L, const Vec3& v, Precision p) {
  const auto& a = L.T1;
  const auto& b = L.T2;
  const PrecReal det = a[0] * b[1] - a[1] * b[0];
  if (det.isZero()) throw DomainError("lattice periods are parallel");
  const PrecReal c1 = detail::roundToInteger((v[0] * b[1] - v[1] * b[0]) / det);
  const PrecReal c2 = detail::roundToInteger((a[0] * v[1] - a[1] * v[0]) / det);
  PrecReal s(p);
  for (int k = 0; k < 3; ++k) {
    const PrecReal r = v[k] - c1 * a[k] - c2 * b[k];
    s += r * r;
  }
  return sqrt(s);
}

/// For each equation of the period system: the immersion transported once
/// around the cycle over its segment, measured as distance from the lattice.
/// The cycle is followed along a path through the upper half-plane.
inline std::vector<PrecReal> handleClosureErrors(const FamilyInstance& inst, Precision p,
                                                 const QuadratureOptions& opt = {}) {
  const LatticePeriods L = latticePeriods(inst.wd, p, opt);
  std::vector<PrecReal> out;
  for (const auto& eq : inst.system.equations) {
    PrecReal lo = convert(eq.segment.lo, p), hi = convert(eq.segment.hi, p);
    // endpoints must match the divisor exactly so they count as branch points
    for (const auto& f : inst.wd.divisor.factors()) {
      if (f.location == eq.segment.lo) lo = f.location;
      if (f.location == eq.segment.hi) hi = f.location;
    }
    const ImmersionPoint ip = immerse(inst.wd, detail::upperArc(lo, hi, p), p, opt);
    const Vec3 cycle{ip.xyz[0] * 2L, ip.xyz[1] * 2L, PrecReal(p)};
    out.push_back(latticeDistance(L, cycle, p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// meshes

struct GridOptions {
  int radialSamples = 32;
  int angularSamples = 32;
  double truncationRadius = 1e3;
  int digits = 20;
  QuadratureOptions quadrature;
};

struct SeamPair {
  int a = 0;
  int b = 0;
  int mirror = 2;  // 2: G real on the gap (x2 mirror), 1: G imaginary (x1 mirror)
};

/// Four copies of the upper half-plane piece: identity, tau2, tau1 tau2, tau1
/// (copy k holds vertices [k R A, (k+1) R A), vertex (i, j) at i * A + j).
struct Mesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<double, 3>> normals;
  std::vector<std::array<int, 3>> triangles;
  std::vector<SeamPair> seams;
  int radialSamples = 0;
  int angularSamples = 0;
  int copies = 0;
  double truncationRadius = 0;
  double diameter = 0;
  std::array<double, 3> T1{};
  std::array<double, 3> T2{};
};

namespace detail {

inline std::array<double, 3> toDouble3(const Vec3& v) { return {v[0].toDouble(), v[1].toDouble(), v[2].toDouble()}; }

inline double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

inline double latticeDistance(const std::array<double, 3>& T1, const std::array<double, 3>& T2,
                              const std::array<double, 3>& v) {
  const double det = T1[0] * T2[1] - T1[1] * T2[0];
  const double c1 = std::round((v[0] * T2[1] - v[1] * T2[0]) / det);
  const double c2 = std::round((T1[0] * v[1] - T1[1] * v[0]) / det);
  double s = 0;
  for (int k = 0; k < 3; ++k) {
    const double r = v[k] - c1 * T1[k] - c2 * T2[k];
    s += r * r;
  }
  return std::sqrt(s);
}

struct GridPositions {
  std::vector<Vec3> x;  // i * A + j
};

// Cumulative edge integrals over one half-plane: arcs along the middle row,
// then radial edges out along every column.
inline std::vector<Vec3> halfPlanePositions(const WeierstrassData& wd, const std::vector<PrecReal>& s,
                                            const std::vector<PrecReal>& th, int half, Precision p,
                                            const QuadratureOptions& opt) {
  const auto& d = wd.divisor;
  const int R = static_cast<int>(s.size());
  const int A = static_cast<int>(th.size());
  const int i0 = (R - 1) / 2;
  const int j0 = (A - 1) / 2;
  const PrecComplex I = PrecComplex::i(p);
  const PrecComplex one(PrecReal(1L, p), PrecReal(p));
  auto wfun = [&](const PrecComplex& z) { return wUpper(d, z); };
  std::vector<Forms3> arcs(A - 1), radials(static_cast<size_t>(A) * (R - 1));
  const PrecReal rowRadius = exp(s[i0]);
  parallelFor(arcs.size() + radials.size(), [&](size_t e) {
    if (e < arcs.size()) {
      const int j = static_cast<int>(e);
      PrecReal a = th[j], b = th[j + 1];
      if (half < 0) a = -a, b = -b;
      arcs[j] = curveIntegral(
          a, b, [&](const PrecReal& t) { return std::make_pair(polar(rowRadius, t), I); }, wfun, p, opt);
      return;
    }
    const size_t k = e - arcs.size();
    const int j = static_cast<int>(k / (R - 1));
    const int i = static_cast<int>(k % (R - 1));
    if (j == 0 || j == A - 1) {
      const long sgn = j == 0 ? 1 : -1;
      radials[k] = axisIntegral(wd, exp(s[i]) * sgn, exp(s[i + 1]) * sgn, half, p, opt);
    } else {
      PrecReal angle = th[j];
      if (half < 0) angle = -angle;
      radials[k] = curveIntegral(
          s[i], s[i + 1], [&](const PrecReal& t) { return std::make_pair(polar(exp(t), angle), one); }, wfun, p, opt);
    }
  });
  std::vector<Vec3> x(static_cast<size_t>(R) * A, Vec3{PrecReal(p), PrecReal(p), PrecReal(p)});
  auto add = [&](const Vec3& base, const Forms3& f, int sign) {
    Vec3 r = base;
    for (int c = 0; c < 3; ++c) r[c] = sign > 0 ? base[c] + f[c].re() : base[c] - f[c].re();
    return r;
  };
  for (int j = j0 + 1; j < A; ++j) x[i0 * A + j] = add(x[i0 * A + j - 1], arcs[j - 1], 1);
  for (int j = j0 - 1; j >= 0; --j) x[i0 * A + j] = add(x[i0 * A + j + 1], arcs[j], -1);
  for (int j = 0; j < A; ++j) {
    for (int i = i0; i + 1 < R; ++i) x[(i + 1) * A + j] = add(x[i * A + j], radials[j * (R - 1) + i], 1);
    for (int i = i0 - 1; i >= 0; --i) x[i * A + j] = add(x[(i + 1) * A + j], radials[j * (R - 1) + i], -1);
  }
  return x;
}

inline std::array<double, 3> gaussNormal(const BranchDivisor& d, const PrecComplex& z, Precision p) {
  for (const auto& f : d.factors()) {
    const PrecReal tol = abs(f.location) * pow10(-(p.digits() - 3), p);
    if (abs(z.re() - f.location) <= tol && abs(z.im()) <= tol)
      return {0.0, 0.0, f.exponent > 0 ? -1.0 : 1.0};
  }
  const PrecComplex g = wUpper(d, z);
  const double gr = g.re().toDouble(), gi = g.im().toDouble();
  const double m = gr * gr + gi * gi;
  return {2 * gr / (m + 1), 2 * gi / (m + 1), (m - 1) / (m + 1)};
}

}  // namespace detail

/// Triangulated translational fundamental domain on a log-polar grid about
/// z = 0. The truncation grows when needed so every branch point lies inside.
inline Mesh buildMesh(const WeierstrassData& wd, const GridOptions& grid = {}) {
  if (grid.radialSamples < 2) throw ConfigError("mesh needs at least 2 radial samples");
  if (grid.angularSamples < 3) throw ConfigError("mesh needs at least 3 angular samples");
  if (!(grid.truncationRadius > 1.0)) throw ConfigError("truncation radius must exceed 1");
  const Precision p(grid.digits);
  const auto& d = wd.divisor;
  double T = grid.truncationRadius;
  T = std::max(T, 10.0 * detail::maxAbsLocation(d));
  T = std::max(T, 10.0 / detail::minAbsLocation(d));
  const int R = grid.radialSamples, A = grid.angularSamples;
  const PrecReal L = log(PrecReal(T, p));
  std::vector<PrecReal> s, th;
  for (int i = 0; i < R; ++i) s.push_back(L * PrecReal(2 * i - (R - 1), p) / PrecReal(R - 1, p));
  for (int j = 0; j < A; ++j) th.push_back(pi(p) * PrecReal(j, p) / PrecReal(A - 1, p));

  const std::vector<Vec3> upper = detail::halfPlanePositions(wd, s, th, 1, p, grid.quadrature);
  const std::vector<Vec3> lowerRaw = detail::halfPlanePositions(wd, s, th, -1, p, grid.quadrature);

  // classify axis vertices: 0 regular with G real, 1 regular with G imaginary, 2 branch point
  std::vector<std::pair<int, int>> axis;  // (vertex index, class)
  for (int j : {0, A - 1}) {
    for (int i = 0; i < R; ++i) {
      PrecReal x = exp(s[i]);
      if (j == A - 1) x = -x;
      int cls = detail::imaginaryGap(d, x) ? 1 : 0;
      for (const auto& f : d.factors())
        if (abs(x - f.location) <= abs(f.location) * pow10(-(p.digits() - 3), p)) cls = 2;
      axis.emplace_back(i * A + j, cls);
    }
  }
  int realRef = -1, imagRef = -1;
  for (auto [v, cls] : axis) {
    if (cls == 0 && realRef < 0) realRef = v;
    if (cls == 1 && imagRef < 0) imagRef = v;
  }
  if (realRef < 0) throw DomainError("no axis vertex where G is real");
  // planes carrying the reference gaps
  const PrecReal c2 = upper[realRef][1];
  const PrecReal c1 = imagRef >= 0 ? upper[imagRef][0] : PrecReal(p);
  Vec3 shift;
  for (int k = 0; k < 3; ++k) shift[k] = upper[realRef][k] - lowerRaw[realRef][k];

  Mesh m;
  m.radialSamples = R;
  m.angularSamples = A;
  m.copies = 4;
  m.truncationRadius = T;
  const int n = R * A;
  m.vertices.resize(static_cast<size_t>(4) * n);
  m.normals.resize(m.vertices.size());
  for (int v = 0; v < n; ++v) {
    const Vec3& u = upper[v];
    Vec3 lo;
    for (int k = 0; k < 3; ++k) lo[k] = lowerRaw[v][k] + shift[k];
    const PrecReal mx1 = c1 * 2L - u[0];
    const PrecReal mx2 = c2 * 2L - u[1];
    m.vertices[v] = detail::toDouble3(u);
    m.vertices[n + v] = detail::toDouble3(lo);
    m.vertices[2 * n + v] = {mx1.toDouble(), u[1].toDouble(), u[2].toDouble()};
    m.vertices[3 * n + v] = {mx1.toDouble(), mx2.toDouble(), u[2].toDouble()};
    const int i = v / A, j = v % A;
    const auto N = detail::gaussNormal(d, polar(exp(s[i]), th[j]), p);
    m.normals[v] = N;
    m.normals[n + v] = {N[0], -N[1], N[2]};
    m.normals[2 * n + v] = {-N[0], N[1], N[2]};
    m.normals[3 * n + v] = {-N[0], -N[1], N[2]};
  }
  for (int c = 0; c < 4; ++c) {
    const bool flip = c == 1 || c == 2;
    for (int i = 0; i + 1 < R; ++i) {
      for (int j = 0; j + 1 < A; ++j) {
        const int v00 = c * n + i * A + j, v10 = v00 + A, v01 = v00 + 1, v11 = v10 + 1;
        if (flip) {
          m.triangles.push_back({v00, v11, v10});
          m.triangles.push_back({v00, v01, v11});
        } else {
          m.triangles.push_back({v00, v10, v11});
          m.triangles.push_back({v00, v11, v01});
        }
      }
    }
  }
  for (auto [v, cls] : axis) {
    if (cls != 1) {
      m.seams.push_back({v, n + v, 2});
      m.seams.push_back({2 * n + v, 3 * n + v, 2});
    }
    if (cls != 0) {
      m.seams.push_back({v, 2 * n + v, 1});
      m.seams.push_back({n + v, 3 * n + v, 1});
    }
  }
  double diam = 0;
  for (size_t a = 0; a < m.vertices.size(); ++a)
    for (size_t b = a + 1; b < m.vertices.size(); ++b) diam = std::max(diam, detail::dist3(m.vertices[a], m.vertices[b]));
  m.diameter = diam;
  const LatticePeriods lat = latticePeriods(wd, p, grid.quadrature);
  m.T1 = detail::toDouble3(lat.T1);
  m.T2 = detail::toDouble3(lat.T2);
  return m;
}

/// Largest seam mismatch modulo the lattice, relative to the mesh diameter.
inline double seamDefect(const Mesh& m) {
  double worst = 0;
  for (const auto& sp : m.seams) {
    std::array<double, 3> dv;
    for (int k = 0; k < 3; ++k) dv[k] = m.vertices[sp.a][k] - m.vertices[sp.b][k];
    worst = std::max(worst, detail::latticeDistance(m.T1, m.T2, dv) / m.diameter);
  }
  return worst;
}

/// The tau2 copy against the mirror image (x1, -x2, x3) of the first copy,
/// up to a translation; relative to the diameter.
inline double tau2Defect(const Mesh& m) {
  const int n = m.radialSamples * m.angularSamples;
  std::array<double, 3> mean{};
  std::vector<std::array<double, 3>> diff(n);
  for (int v = 0; v < n; ++v) {
    const auto& u = m.vertices[v];
    const auto& l = m.vertices[n + v];
    diff[v] = {l[0] - u[0], l[1] + u[1], l[2] - u[2]};
    for (int k = 0; k < 3; ++k) mean[k] += diff[v][k] / n;
  }
  double worst = 0;
  for (const auto& dv : diff) worst = std::max(worst, detail::dist3(dv, mean));
  return worst / m.diameter;
}

/// Largest |vertical normal component| on the truncation circles.
inline double endNormalDefect(const Mesh& m) {
  const int R = m.radialSamples, A = m.angularSamples, n = R * A;
  double worst = 0;
  for (int c = 0; c < m.copies; ++c)
    for (int i : {0, R - 1})
      for (int j = 0; j < A; ++j) worst = std::max(worst, std::abs(m.normals[c * n + i * A + j][2]));
  return worst;
}

/// Absolute angle between the lattice periods' directions measured as
/// |cos|, i.e. |T1 . T2| / (|T1| |T2|).
inline double latticeOrthogonality(const Mesh& m) {
  double dot = 0, a = 0, b = 0;
  for (int k = 0; k < 3; ++k) {
    dot += m.T1[k] * m.T2[k];
    a += m.T1[k] * m.T1[k];
    b += m.T2[k] * m.T2[k];
  }
  return std::abs(dot) / std::sqrt(a * b);
}

/// Copy of the mesh scaled to unit diameter with seam pairs closer than
/// `tol` merged. Triangles are reindexed; welded seams are dropped.
inline Mesh weldedUnitMesh(const Mesh& in, double tol = 1e-8) {
  Mesh m = in;
  const double scale = in.diameter > 0 ? 1.0 / in.diameter : 1.0;
  for (auto& v : m.vertices)
    for (auto& c : v) c *= scale;
  for (auto& c : m.T1) c *= scale;
  for (auto& c : m.T2) c *= scale;
  m.diameter = 1.0;
  std::vector<int> parent(m.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<SeamPair> kept;
  for (const auto& sp : m.seams) {
    if (detail::dist3(m.vertices[sp.a], m.vertices[sp.b]) <= tol) {
      const int ra = find(sp.a), rb = find(sp.b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    } else {
      kept.push_back(sp);
    }
  }
  std::vector<int> index(m.vertices.size(), -1);
  std::vector<std::array<double, 3>> verts, norms;
  for (size_t v = 0; v < m.vertices.size(); ++v) {
    if (find(static_cast<int>(v)) == static_cast<int>(v)) {
      index[v] = static_cast<int>(verts.size());
      verts.push_back(m.vertices[v]);
      norms.push_back(m.normals[v]);
    }
  }
  for (size_t v = 0; v < m.vertices.size(); ++v) index[v] = index[find(static_cast<int>(v))];
  std::vector<std::array<int, 3>> tris;
  for (const auto& t : m.triangles) {
    std::array<int, 3> r{index[t[0]], index[t[1]], index[t[2]]};
    if (r[0] != r[1] && r[1] != r[2] && r[0] != r[2]) tris.push_back(r);
  }
  for (auto& sp : kept) sp.a = index[sp.a], sp.b = index[sp.b];
  m.vertices = std::move(verts);
  m.normals = std::move(norms);
  m.triangles = std::move(tris);
  m.seams = std::move(kept);
  return m;
}

/// ASCII OBJ of the welded unit-diameter mesh.
inline void writeObj(const Mesh& mesh, const std::string& path) {
  const Mesh m = weldedUnitMesh(mesh);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[96];
  for (const auto& v : m.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out << buf;
  }
  for (const auto& t : m.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw IoError("write failed for " + path);
}

// ---------------------------------------------------------------------------
// flat structures

struct FlatPolygon {
  FormKind form = FormKind::GDH;
  std::vector<PrecComplex> vertices;
  std::vector<std::string> labels;
  std::vector<bool> atBranchPoint;
  PrecReal closure;  // |sum of all developed edges| around the half-plane
};

/// Develops Gdh (or dh/G) along the boundary of the upper half-plane cut off
/// near the ends: the positive axis, a large half-circle, the negative axis
/// and a small half-circle back. Vertices are the images of the marked points.
inline FlatPolygon developFlat(const WeierstrassData& wd, FormKind form, Precision p,
                               const QuadratureOptions& opt = {}) {
  if (form != FormKind::GDH && form != FormKind::INVGDH) throw ConfigError("flat structures use GDH or INVGDH");
  const auto& d = wd.divisor;
  struct Mark {
    PrecReal x;
    std::string label;
    bool branch;
  };
  std::vector<Mark> pos, neg;
  for (const auto& f : d.factors()) (f.location.sign() > 0 ? pos : neg).push_back({f.location, toString(f.location, 12), true});
  for (long e : {1L, -1L}) {
    const PrecReal x(e, p);
    if (!d.isBranchLocation(x)) (e > 0 ? pos : neg).push_back({x, e > 0 ? "1" : "-1", false});
  }
  auto byX = [](const Mark& a, const Mark& b) { return a.x < b.x; };
  std::sort(pos.begin(), pos.end(), byX);
  std::sort(neg.begin(), neg.end(), byX);
  const PrecReal eps(detail::minAbsLocation(d) / 100, p);
  const PrecReal big(detail::maxAbsLocation(d) * 100, p);

  std::vector<Mark> route;  // boundary order
  route.push_back({eps, "0+", false});
  for (auto& m : pos) route.push_back(m);
  route.push_back({big, "inf+", false});
  route.push_back({-big, "inf-", false});
  for (auto& m : neg) route.push_back(m);
  route.push_back({-eps, "0-", false});

  auto arc = [&](const PrecReal& r, bool forward) {
    // w or 1/w times dz/z = i dtheta over theta in [0, pi]
    PrecComplex v = detail::integrateComplex(
        pi(p),
        [&](const PrecReal& lo, const PrecReal& hi) {
          const PrecReal t = lo < hi ? lo : pi(p) - hi;
          PrecComplex w = wUpper(d, polar(r, t));
          if (form == FormKind::INVGDH) w = PrecComplex::constant(1, w.bits()) / w;
          return timesI(w);
        },
        p, opt);
    return forward ? v : -v;
  };

  std::vector<PrecComplex> edges;
  for (size_t k = 0; k + 1 < route.size(); ++k) {
    if (route[k].label == "inf+") {
      edges.push_back(arc(big, true));
      continue;
    }
    const Segment seg = makeSegment(d, route[k].x, route[k + 1].x);
    edges.push_back(conj(periodIntegral(wd, form, seg, p, opt)));
  }
  edges.push_back(arc(eps, false));

  FlatPolygon poly;
  poly.form = form;
  PrecComplex at = detail::zeroC(p);
  for (size_t k = 0; k < route.size(); ++k) {
    poly.vertices.push_back(at);
    poly.labels.push_back(route[k].label);
    poly.atBranchPoint.push_back(route[k].branch);
    at += edges[k];
  }
  poly.closure = abs(at);
  return poly;
}

/// Turning angle arg(e_out / e_in) at each vertex sitting on a branch point.
inline std::vector<double> branchTurningAngles(const FlatPolygon& poly) {
  std::vector<double> out;
  const size_t n = poly.vertices.size();
  for (size_t k = 0; k < n; ++k) {
    if (!poly.atBranchPoint[k]) continue;
    const PrecComplex ein = poly.vertices[k] - poly.vertices[(k + n - 1) % n];
    const PrecComplex eout = poly.vertices[(k + 1) % n] - poly.vertices[k];
    out.push_back(arg(eout / ein).toDouble());
  }
  return out;
}

inline void writeFlatSvg(const FlatPolygon& poly, const std::string& path) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& v : poly.vertices) {
    const double x = v.re().toDouble(), y = v.im().toDouble();
    xmin = std::min(xmin, x), xmax = std::max(xmax, x);
    ymin = std::min(ymin, y), ymax = std::max(ymax, y);
  }
  const double w = std::max(xmax - xmin, 1e-12), h = std::max(ymax - ymin, 1e-12);
  const double pad = 0.05 * std::max(w, h);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[160];
  std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.9g %.9g %.9g %.9g\">\n",
                xmin - pad, -ymax - pad, w + 2 * pad, h + 2 * pad);
  out << buf;
  out << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"" << 0.004 * std::max(w, h) << "\" points=\"";
  for (const auto& v : poly.vertices) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g ", v.re().toDouble(), -v.im().toDouble());
    out << buf;
  }
  out << "\"/>\n</svg>\n";
  if (!out) throw IoError("write failed for " + path);
}

/// One line per vertex: label, real part, imaginary part.
inline void writeFlatVertices(const FlatPolygon& poly, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "# form " << toString(poly.form) << "\n# label re im\n";
  for (size_t k = 0; k < poly.vertices.size(); ++k)
    out << poly.labels[k] << ' ' << toString(poly.vertices[k].re(), 17) << ' ' << toString(poly.vertices[k].im(), 17)
        << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace periodforge
