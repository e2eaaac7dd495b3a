#pragma once

// Tanh-sinh quadrature and the period integrals of the Weierstrass forms.
//
// Abscissae are stored as fractions of the interval measured from each end,
// so a node 1e-80 away from an endpoint is represented as 1e-80 and never as
// (endpoint + 1e-80) - endpoint.

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "periodforge/curve.hpp"
#include "periodforge/errors.hpp"
#include "periodforge/numerics.hpp"

namespace periodforge {

enum class FormKind { PHI1, PHI2, PHI3, GDH, INVGDH };

inline const char* toString(FormKind f) {
  switch (f) {
    case FormKind::PHI1: return "PHI1";
    case FormKind::PHI2: return "PHI2";
    case FormKind::PHI3: return "PHI3";
    case FormKind::GDH: return "GDH";
    case FormKind::INVGDH: return "INVGDH";
  }
  return "?";
}

struct Segment {
  PrecReal lo;
  PrecReal hi;
  bool loSingular = false;
  bool hiSingular = false;
};

/// Segment between two real points of the curve; endpoint flags are set from
/// the divisor. Throws InvalidSegmentError when the open interval holds a
/// branch location or z = 0, or when lo >= hi.
inline Segment makeSegment(const BranchDivisor& d, PrecReal lo, PrecReal hi) {
  if (!(lo < hi)) throw InvalidSegmentError("segment needs lo < hi, got [" + toString(lo, 12) + ", " + toString(hi, 12) + "]");
  if (lo.sign() <= 0 && hi.sign() >= 0)
    throw InvalidSegmentError("segment [" + toString(lo, 12) + ", " + toString(hi, 12) + "] meets z = 0 where dh has a pole");
  for (const auto& f : d.factors()) {
    if (f.location > lo && f.location < hi)
      throw InvalidSegmentError("branch location " + toString(f.location, 12) + " inside segment");
  }
  Segment s{std::move(lo), std::move(hi), false, false};
  s.loSingular = d.isBranchLocation(s.lo);
  s.hiSingular = d.isBranchLocation(s.hi);
  return s;
}

struct QuadratureOptions {
  int maxLevels = 12;
  int minLevels = 3;
};

namespace detail {

struct DENode {
  PrecReal fracLo;  // (x - lo) / length
  PrecReal fracHi;  // (hi - x) / length
  PrecReal weight;  // dx/dt / length, without the step h
};

// t_max for which the tail of a |x - endpoint|^(-1/2) integrand is below
// 10^-(P+8).
inline double tMax(int digits) {
  const double smax = (digits + 8) * 2.302585092994046;
  return std::asinh(2.0 * smax / 3.141592653589793);
}

inline constexpr double kH0 = 0.5;

// Nodes added at `level`: all j*h0 at level 0, odd multiples of h0/2^level after.
inline std::vector<DENode> makeLevel(Precision p, int level) {
  std::vector<DENode> out;
  const double tmax = tMax(p.digits());
  const long denom = 1L << level;
  const long jmax = static_cast<long>(std::floor(tmax / kH0 * denom));
  const PrecReal halfPi = pi(p) / 2;
  const PrecReal quarterPi = pi(p) / 4;
  for (long j = -jmax; j <= jmax; ++j) {
    if (level > 0 && (j % 2 == 0)) continue;
    PrecReal t = PrecReal(j, p) * PrecReal(kH0, p) / PrecReal(denom, p);
    PrecReal s = halfPi * sinh(t);
    PrecReal e2 = exp(s * 2);
    PrecReal fracHi = 1 / (e2 + 1);       // 1/(1+e^{2s})
    PrecReal fracLo = e2 / (e2 + 1);      // 1/(1+e^{-2s})
    PrecReal ch = cosh(s);
    PrecReal w = quarterPi * cosh(t) / (ch * ch);  // (dx/dt) / length
    out.push_back({std::move(fracLo), std::move(fracHi), std::move(w)});
  }
  return out;
}

class DENodeCache {
 public:
  static DENodeCache& instance() {
    static DENodeCache c;
    return c;
  }
  const std::vector<DENode>& level(Precision p, int level) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(p.bits(), level);
    auto it = levels_.find(key);
    if (it == levels_.end()) {
      it = levels_.emplace(key, std::make_unique<std::vector<DENode>>(makeLevel(p, level))).first;
    }
    return *it->second;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<mpfr_prec_t, int>, std::unique_ptr<std::vector<DENode>>> levels_;
};

}  // namespace detail

/// Integrates K real functions over an interval of the given length. The
/// callback receives the node's distances from the two ends (offLo, offHi)
/// and returns the K integrand values there. Stops when two successive
/// levels agree to 10^-(P-5) (relative once the integral exceeds 1).
template <size_t K, class F>
std::array<PrecReal, K> integrateOffsets(const PrecReal& length, F&& f, Precision p,
                                         const QuadratureOptions& opt = {}) {
  auto& cache = detail::DENodeCache::instance();
  const PrecReal tol = pow10(-(p.digits() - 5), p);
  std::array<PrecReal, K> sum;
  for (auto& v : sum) v = PrecReal(p);
  std::array<PrecReal, K> prev;
  PrecReal h(detail::kH0, p);
  size_t stuck = 0;
  for (int level = 0; level <= opt.maxLevels; ++level) {
    if (level > 0) h /= 2L;
    for (const auto& node : cache.level(p, level)) {
      PrecReal offLo = length * node.fracLo;
      PrecReal offHi = length * node.fracHi;
      std::array<PrecReal, K> vals = f(offLo, offHi);
      for (size_t k = 0; k < K; ++k) {
        vals[k] *= node.weight;
        sum[k] += vals[k];
      }
    }
    std::array<PrecReal, K> est;
    for (size_t k = 0; k < K; ++k) est[k] = sum[k] * h * length;
    if (level >= opt.minLevels) {
      bool done = true;
      for (size_t k = 0; k < K; ++k) {
        PrecReal scale = max(abs(est[k]), PrecReal(1L, p));
        if (abs(est[k] - prev[k]) > tol * scale) {
          if (done) stuck = k;
          done = false;
        }
      }
      if (done) return est;
    }
    if (level == opt.maxLevels) {
      throw QuadratureError("tanh-sinh did not converge in " + std::to_string(opt.maxLevels) + " levels" +
                                (K > 1 ? " (component " + std::to_string(stuck) + ")" : ""),
                            toString(prev[stuck], 20), toString(est[stuck], 20));
    }
    prev = std::move(est);
  }
  return prev;
}

/// Integral of f over seg. f receives (x, x - lo, hi - x), the latter two
/// computed without cancellation near the ends.
template <class F>
PrecReal integrateDE(F&& f, const Segment& seg, Precision p, const QuadratureOptions& opt = {}) {
  PrecReal lo = seg.lo;
  PrecReal hi = seg.hi;
  lo.roundTo(p);
  hi.roundTo(p);
  PrecReal len = hi - lo;
  auto res = integrateOffsets<1>(
      len,
      [&](const PrecReal& dlo, const PrecReal& dhi) {
        PrecReal x = dlo < dhi ? lo + dlo : hi - dhi;
        return std::array<PrecReal, 1>{f(x, dlo, dhi)};
      },
      p, opt);
  return std::move(res[0]);
}

/// The form whose integral over a gap is real: PHI1 where w^2 > 0, PHI2 where w^2 < 0.
inline FormKind realForm(const BranchDivisor& d, const Segment& seg) {
  return axisPhase(d, seg.hi) % 2 == 0 ? FormKind::PHI1 : FormKind::PHI2;
}

namespace detail {

// Integrals over a gap in the log variable u = log|z|, where dz/z = du:
// A = int |w| du and B = int 1/|w| du, plus the orientation and phase needed
// to assemble any of the forms.
struct GapIntegrals {
  PrecReal A;
  PrecReal B;
  PrecReal logLength;  // int dz/z over the segment
  int phase = 0;       // w = i^phase |w|
};

inline GapIntegrals gapIntegrals(const BranchDivisor& d, const Segment& seg, Precision p,
                                 const QuadratureOptions& opt) {
  const bool negative = seg.hi.sign() < 0;
  // E0 is the end at the smaller |z|, E1 at the larger.
  PrecReal E0 = negative ? seg.hi : seg.lo;
  PrecReal E1 = negative ? seg.lo : seg.hi;
  E0.roundTo(p);
  E1.roundTo(p);
  const PrecReal U0 = log(abs(E0));
  const PrecReal U1 = log(abs(E1));
  const PrecReal L = U1 - U0;

  const size_t nf = d.factors().size();
  std::vector<PrecReal> d0, d1;
  std::vector<int> ex;
  d0.reserve(nf);
  d1.reserve(nf);
  for (const auto& f : d.factors()) {
    PrecReal loc = f.location;
    loc.roundTo(p);
    d0.push_back(E0 - loc);
    d1.push_back(E1 - loc);
    ex.push_back(f.exponent);
  }

  auto integrand = [&](const PrecReal& du0, const PrecReal& du1) {
    // z - E0 = E0 (e^{du0} - 1), z - E1 = E1 (e^{-du1} - 1)
    const bool nearLo = du0 <= du1;
    PrecReal dz = nearLo ? E0 * expm1(du0) : E1 * expm1(-du1);
    const auto& dd = nearLo ? d0 : d1;
    PrecReal num(1L, p), den(1L, p), t(p);
    for (size_t i = 0; i < nf; ++i) {
      mpfr_add(t.raw(), dz.raw(), dd[i].raw(), MPFR_RNDN);
      if (ex[i] > 0) mpfr_mul(num.raw(), num.raw(), t.raw(), MPFR_RNDN);
      else mpfr_mul(den.raw(), den.raw(), t.raw(), MPFR_RNDN);
    }
    mpfr_div(t.raw(), num.raw(), den.raw(), MPFR_RNDN);
    mpfr_abs(t.raw(), t.raw(), MPFR_RNDN);
    mpfr_sqrt(t.raw(), t.raw(), MPFR_RNDN);
    PrecReal inv = 1 / t;
    return std::array<PrecReal, 2>{std::move(t), std::move(inv)};
  };
  auto ab = integrateOffsets<2>(L, integrand, p, opt);
  GapIntegrals g;
  g.phase = axisPhase(d, seg.hi);
  // z runs lo -> hi; on the negative axis that is u from U1 down to U0.
  g.A = negative ? -ab[0] : std::move(ab[0]);
  g.B = negative ? -ab[1] : std::move(ab[1]);
  g.logLength = negative ? -L : L;
  return g;
}

inline PrecComplex assemble(const GapIntegrals& g, FormKind form, Precision p) {
  const PrecComplex ik = iPower(g.phase, p);
  const PrecComplex imk = iPower(-g.phase, p);
  switch (form) {
    case FormKind::PHI3: return PrecComplex(g.logLength, PrecReal(0L, p));
    case FormKind::GDH: return ik * g.A;
    case FormKind::INVGDH: return imk * g.B;
    case FormKind::PHI1: return (imk * g.B - ik * g.A) / PrecReal(2L, p);
    case FormKind::PHI2: return timesI(imk * g.B + ik * g.A) / PrecReal(2L, p);
  }
  throw ConfigError("unknown form");
}

}  // namespace detail

/// Integral of a form over a real gap of the curve, with w taken on the
/// axis sheet (see curve.hpp). Quadrature failures propagate.
inline PrecComplex periodIntegral(const WeierstrassData& wd, FormKind form, const Segment& seg, Precision p,
                                  const QuadratureOptions& opt = {}) {
  if (seg.lo.sign() <= 0 && seg.hi.sign() >= 0)
    throw InvalidSegmentError("segment meets z = 0 where dh has a pole");
  if (form == FormKind::PHI3) {
    PrecReal lo = seg.lo, hi = seg.hi;
    lo.roundTo(p);
    hi.roundTo(p);
    return PrecComplex(log(hi / lo), PrecReal(0L, p));
  }
  auto g = detail::gapIntegrals(wd.divisor, seg, p, opt);
  return detail::assemble(g, form, p);
}

/// All five forms over one gap from a single quadrature pass.
inline std::array<PrecComplex, 5> periodIntegralsAll(const WeierstrassData& wd, const Segment& seg, Precision p,
                                                     const QuadratureOptions& opt = {}) {
  auto g = detail::gapIntegrals(wd.divisor, seg, p, opt);
  return {detail::assemble(g, FormKind::PHI1, p), detail::assemble(g, FormKind::PHI2, p),
          detail::assemble(g, FormKind::PHI3, p), detail::assemble(g, FormKind::GDH, p),
          detail::assemble(g, FormKind::INVGDH, p)};
}

}  // namespace periodforge
