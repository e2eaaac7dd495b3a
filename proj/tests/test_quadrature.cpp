#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "periodforge/families.hpp"

using namespace periodforge;
using bf50 = boost::multiprecision::cpp_bin_float_50;

namespace {

Segment unit(Precision p) { return Segment{PrecReal(0L, p), PrecReal(1L, p), true, true}; }

FamilyInstance rtw(const char* a1, const char* a2, Precision p) {
  return instantiate({FamilyKind::RTW2, 0, 0}, {PrecReal(std::string_view(a1), p), PrecReal(std::string_view(a2), p)}, p);
}

bf50 toBoost(const PrecReal& x) { return bf50(toString(x, 50)); }

}  // namespace

TEST(Quadrature, BetaHalfHalfIsPi) {
  const Precision p(30);
  auto v = integrateDE([](const PrecReal&, const PrecReal& dlo, const PrecReal& dhi) { return 1 / sqrt(dlo * dhi); },
                       unit(p), p);
  EXPECT_GE(agreementDigits(v, pi(p)), 25.0);
}

TEST(Quadrature, PolynomialAndEndpointPower) {
  const Precision p(30);
  auto lin = integrateDE([](const PrecReal& x, const PrecReal&, const PrecReal&) { return x; }, unit(p), p);
  EXPECT_LE(abs(lin - PrecReal(0.5, p)), pow10(-25, p));
  auto inv = integrateDE([](const PrecReal&, const PrecReal&, const PrecReal& dhi) { return 1 / sqrt(dhi); }, unit(p), p);
  EXPECT_LE(abs(inv - PrecReal(2L, p)), pow10(-25, p));
}

TEST(Quadrature, BetaAtFiftyDigits) {
  const Precision p(50);
  auto v = integrateDE([](const PrecReal&, const PrecReal& dlo, const PrecReal& dhi) { return 1 / sqrt(dlo * dhi); },
                       unit(p), p);
  EXPECT_GE(agreementDigits(v, pi(p)), 40.0);
}

TEST(Quadrature, FailureCarriesLastEstimates) {
  const Precision p(40);
  QuadratureOptions opt;
  opt.maxLevels = 3;
  try {
    // nearly non-integrable endpoint; three levels cannot resolve it
    integrateDE([](const PrecReal&, const PrecReal& dlo, const PrecReal&) { return pow(dlo, PrecReal(-0.97, Precision(40))); },
                unit(p), p, opt);
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_FALSE(e.previousEstimate().empty());
    EXPECT_FALSE(e.lastEstimate().empty());
    EXPECT_NE(e.previousEstimate(), e.lastEstimate());
  }
}

TEST(Quadrature, HeightFormIsLogRatio) {
  const Precision p(40);
  auto inst = rtw("0.1", "0.4677900971198217", p);
  const auto& a = inst.params;
  auto seg = makeSegment(inst.wd.divisor, a[0], a[1]);
  auto v = periodIntegral(inst.wd, FormKind::PHI3, seg, p);
  EXPECT_LE(abs(v.re() - log(a[1] / a[0])), pow10(-38, p));
  EXPECT_TRUE(v.im().isZero());
}

TEST(Quadrature, AdditiveOverRegularSplit) {
  const Precision p(40);
  auto inst = rtw("0.1", "0.4677900971198217", p);
  const auto& d = inst.wd.divisor;
  const PrecReal lo = inst.params[0], hi = inst.params[1];
  const PrecReal mid(0.3, p);
  for (FormKind f : {FormKind::PHI1, FormKind::PHI2, FormKind::GDH, FormKind::INVGDH}) {
    auto whole = periodIntegral(inst.wd, f, makeSegment(d, lo, hi), p);
    auto left = periodIntegral(inst.wd, f, makeSegment(d, lo, mid), p);
    auto right = periodIntegral(inst.wd, f, makeSegment(d, mid, hi), p);
    EXPECT_LE(abs(whole - left - right), pow10(-33, p)) << toString(f);
  }
}

TEST(Quadrature, GapIntegralAgreesWithBoost) {
  // |Gdh| over (a1, a2) from boost's tanh-sinh on an independently built |w^2|
  const Precision p(45);
  auto inst = rtw("0.1", "0.4677900971198217", p);
  const auto& d = inst.wd.divisor;
  std::vector<std::pair<bf50, int>> fac;
  for (const auto& f : d.factors()) fac.emplace_back(toBoost(f.location), f.exponent);
  const bf50 lo = toBoost(inst.params[0]), hi = toBoost(inst.params[1]);
  auto absW = [&](const bf50& x, const bf50& xc) {
    bf50 v = 1;
    for (const auto& [loc, e] : fac) {
      bf50 t;
      if (loc == lo) t = xc < 0 ? bf50(-xc) : bf50(x - lo);
      else if (loc == hi) t = xc > 0 ? bf50(xc) : bf50(hi - x);
      else t = x - loc;
      t = boost::multiprecision::abs(t);
      v = e > 0 ? v * t : v / t;
    }
    return boost::multiprecision::sqrt(v);
  };
  boost::math::quadrature::tanh_sinh<bf50> ts(15);
  const bf50 tol = std::numeric_limits<bf50>::epsilon() * 1000;
  bf50 refA = ts.integrate([&](const bf50& x, const bf50& xc) { return absW(x, xc) / x; }, lo, hi, tol);
  bf50 refB = ts.integrate([&](const bf50& x, const bf50& xc) { return 1 / (absW(x, xc) * x); }, lo, hi, tol);

  auto seg = makeSegment(d, inst.params[0], inst.params[1]);
  auto A = abs(periodIntegral(inst.wd, FormKind::GDH, seg, p));
  auto B = abs(periodIntegral(inst.wd, FormKind::INVGDH, seg, p));
  EXPECT_GE(agreementDigits(A, PrecReal(std::string_view(refA.str(50)), p)), 35.0);
  EXPECT_GE(agreementDigits(B, PrecReal(std::string_view(refB.str(50)), p)), 35.0);
}

TEST(Quadrature, RealFormOnGap) {
  // on (a1, a2) w is imaginary, so PHI1 vanishes and PHI2 is real
  const Precision p(30);
  auto inst = rtw("0.1", "0.4677900971198217", p);
  auto seg = makeSegment(inst.wd.divisor, inst.params[0], inst.params[1]);
  auto all = periodIntegralsAll(inst.wd, seg, p);
  EXPECT_EQ(realForm(inst.wd.divisor, seg), FormKind::PHI2);
  EXPECT_LE(abs(all[1].im()), pow10(-28, p));
  EXPECT_GT(abs(all[1].re()), PrecReal(1L, p));
}

TEST(Quadrature, SegmentValidation) {
  const Precision p(30);
  auto inst = rtw("0.1", "0.4677900971198217", p);
  const auto& d = inst.wd.divisor;
  EXPECT_THROW(makeSegment(d, PrecReal(-0.01, p), PrecReal(0.05, p)), InvalidSegmentError);
  EXPECT_THROW(makeSegment(d, PrecReal(0.05, p), PrecReal(0.3, p)), InvalidSegmentError);
  EXPECT_THROW(makeSegment(d, PrecReal(0.3, p), PrecReal(0.2, p)), InvalidSegmentError);
  auto s = makeSegment(d, inst.params[0], PrecReal(0.3, p));
  EXPECT_TRUE(s.loSingular);
  EXPECT_FALSE(s.hiSingular);
}

TEST(Quadrature, OffSolutionResidualAnchor) {
  // RTW far from the solution curve: the single entry is clearly nonzero
  const Precision p(30);
  auto r = residualVector(rtw("0.1", "0.9", p), p);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_GT(abs(r[0]), PrecReal(1e-3, p));
}
