#include <gtest/gtest.h>

#include "periodforge/families.hpp"

using namespace periodforge;

namespace {

BranchDivisor scherk(Precision p) { return BranchDivisor(p, {}, {}, Role::NUM, Role::DEN); }

PrecComplex cplx(double re, double im, Precision p) { return {PrecReal(re, p), PrecReal(im, p)}; }

// Continues sqrt(w^2) from a known value at z(0) along z(t), t in [0,1], picking
// at each step the root nearer the previous one.
PrecComplex continueSqrt(const BranchDivisor& d, PrecComplex start, const std::function<PrecComplex(double)>& z,
                         int steps) {
  PrecComplex w = std::move(start);
  for (int k = 1; k <= steps; ++k) {
    PrecComplex r = sqrt(wSquared(d, z(static_cast<double>(k) / steps)));
    w = abs(r - w) < abs(r + w) ? r : -r;
  }
  return w;
}

}  // namespace

TEST(Curve, ScherkProductValues) {
  const Precision p(30);
  const auto d = scherk(p);
  auto w0 = wSquared(d, cplx(0, 0, p));
  EXPECT_NEAR(w0.re().toDouble(), -1.0, 1e-25);
  EXPECT_TRUE(wSquared(d, cplx(1, 0, p)).re().isZero());
  EXPECT_THROW(wSquared(d, cplx(-1, 0, p)), PoleError);
  auto big = wSquared(d, cplx(1e12, 0, p));
  EXPECT_NEAR(big.re().toDouble(), 1.0, 1e-11);
  EXPECT_NEAR(wSquaredAtInfinity(d, p).re().toDouble(), 1.0, 0.0);
  EXPECT_EQ(d.genus(), 0);
}

TEST(Curve, AxisValueAtReferencePoint) {
  const Precision p(30);
  auto w = wOnAxis(scherk(p), PrecReal(2L, p));
  EXPECT_TRUE(w.im().isZero());
  EXPECT_LE(abs(w.re() - sqrt(PrecReal(1L, p) / 3L)), pow10(-28, p));
}

TEST(Curve, AxisSheetMatchesLowerContinuation) {
  const Precision p(30);
  const auto d = scherk(p);
  const PrecComplex start = wOnAxis(d, PrecReal(2L, p));
  // half-circle of radius 2 about 0 through the lower half-plane: 2 -> -2
  auto toMinus2 = [&](double t) {
    return PrecComplex(PrecReal(2.0 * std::cos(M_PI * t), p), PrecReal(-2.0 * std::sin(M_PI * t), p));
  };
  auto wm2 = continueSqrt(d, start, toMinus2, 400);
  auto axis = wOnAxis(d, PrecReal(-2L, p));
  EXPECT_LE(abs(wm2 - axis), pow10(-12, p));  // arc ends are double-rounded
  EXPECT_NEAR(abs(axis).toDouble(), std::sqrt(3.0), 1e-14);

  // 2 -> 1.5 on the axis, then a lower half-circle around 1 down to 0.5
  auto around1 = [&](double t) {
    return PrecComplex(PrecReal(1.0 + 0.5 * std::cos(M_PI * t), p), PrecReal(-0.5 * std::sin(M_PI * t), p));
  };
  auto w15 = continueSqrt(d, start, [&](double t) { return cplx(2.0 - 0.5 * t, 0, p); }, 50);
  auto w05 = continueSqrt(d, w15, around1, 400);
  auto axis05 = wOnAxis(d, PrecReal(0.5, p));
  EXPECT_LE(abs(w05 - axis05), pow10(-12, p));
  EXPECT_TRUE(axis05.re().isZero());
  EXPECT_NEAR(abs(axis05).toDouble(), std::sqrt(1.0 / 3.0), 1e-14);
}

TEST(Curve, UpperBranchIsConjugateOfAxisSheet) {
  const Precision p(40);
  const auto d = scherk(p);
  for (double x : {-3.0, -0.5, 0.25, 0.75, 4.0}) {
    auto up = wUpper(d, cplx(x, 1e-30, p));
    auto axis = wOnAxis(d, PrecReal(x, p));
    EXPECT_LE(abs(conj(up) - axis), pow10(-20, p)) << "x = " << x;
  }
}

TEST(Curve, BranchPointEvaluationThrows) {
  const Precision p(30);
  EXPECT_THROW(wOnAxis(scherk(p), PrecReal(1L, p)), BranchPointError);
}

TEST(Curve, EndClasses) {
  const Precision p(30);
  auto s = endGaussValues(scherk(p), p);
  EXPECT_EQ(s.endAngle, EndAngle::ORTHOGONAL);
  EXPECT_NEAR(abs(s.gZero).toDouble(), 1.0, 1e-25);
  EXPECT_TRUE(s.gZero.re().isZero());
  EXPECT_NEAR(s.gInf.re().toDouble(), 1.0, 1e-25);

  // RTW with b = -a1 a2
  auto rtw = instantiate({FamilyKind::RTW2, 0, 0},
                         {PrecReal(std::string_view("0.1"), p), PrecReal(std::string_view("0.4677900971198217"), p)}, p);
  auto r = endGaussValues(rtw.wd.divisor, p);
  EXPECT_EQ(r.endAngle, EndAngle::PARALLEL);
  EXPECT_NEAR(r.gZero.re().toDouble(), 1.0, 1e-25);
  EXPECT_NEAR(r.gInf.re().toDouble(), 1.0, 1e-25);

  BranchDivisor four(p, {{PrecReal(0.1, p), Role::DEN, std::nullopt}, {PrecReal(0.4, p), Role::NUM, std::nullopt}}, {});
  auto f = endGaussValues(four, p);
  EXPECT_EQ(f.endAngle, EndAngle::NEITHER);
  EXPECT_NEAR(abs(f.gZero.re()).toDouble(), 2.0, 1e-25);
}

TEST(Curve, DependentB) {
  const Precision p(30);
  auto a = [&](std::vector<double> v) {
    std::vector<PrecReal> out;
    for (double x : v) out.emplace_back(x, p);
    return out;
  };
  auto b4 = closeEndConstraint({FamilyKind::PAR_4N, 1, 0}, a({0.1, 0.2, 0.3, 0.4}));
  ASSERT_TRUE(b4);
  EXPECT_NEAR(b4->toDouble(), -1.0 / 6.0, 1e-15);
  auto brtw = closeEndConstraint({FamilyKind::RTW2, 0, 0}, {PrecReal(std::string_view("0.1"), p),
                                                            PrecReal(std::string_view("0.4677900971198217"), p)});
  ASSERT_TRUE(brtw);
  EXPECT_LE(abs(*brtw - PrecReal(std::string_view("-0.04677900971198217"), p)), pow10(-28, p));
  EXPECT_FALSE(closeEndConstraint({FamilyKind::PAR_4N1, 1, 0}, a({0.1, 0.2, 0.3, 0.4, 0.5})));
  EXPECT_THROW(closeEndConstraint({FamilyKind::TYPE_3_4, 0, 0}, a({0.1})), NotApplicableError);
}

TEST(Curve, FreeBFamiliesHaveUnitEndValue) {
  // w^2(0) = 1 for any b when the paired factors cancel
  const Precision p(30);
  for (FamilyKind k : {FamilyKind::PAR_4N1, FamilyKind::PAR_4N3}) {
    const FamilySpec spec{k, 1, 0};
    auto x = defaultSeed(spec, p);
    for (const char* b : {"-1e-7", "-0.3"}) {
      x.back() = PrecReal(std::string_view(b), p);
      auto inst = instantiate(spec, x, p);
      auto w0 = wSquared(inst.wd.divisor, cplx(0, 0, p));
      EXPECT_LE(abs(w0 - PrecComplex::constant(1, w0.bits())), pow10(-27, p)) << kindName(k) << " b = " << b;
    }
  }
}

TEST(Curve, DivisorValidation) {
  const Precision p(30);
  EXPECT_THROW(BranchDivisor(p, {{PrecReal(1.5, p), Role::NUM, std::nullopt}}, {}, std::nullopt, Role::DEN),
               DomainError);
  EXPECT_THROW(BranchDivisor(p, {{PrecReal(0.5, p), Role::NUM, std::nullopt}, {PrecReal(0.2, p), Role::DEN, std::nullopt}}, {}),
               DomainError);
  EXPECT_THROW(BranchDivisor(p, {{PrecReal(0.5, p), Role::NUM, std::nullopt}}, {}), DomainError);
  EXPECT_THROW(BranchDivisor(p, {}, {{PrecReal(0.2, p), Role::NUM, std::nullopt}}, Role::DEN), DomainError);
}

TEST(Curve, MakeWeierstrassDataChecksDeclarations) {
  const Precision p(30);
  EXPECT_NO_THROW(makeWeierstrassData(scherk(p), EndAngle::ORTHOGONAL, 0, p));
  EXPECT_THROW(makeWeierstrassData(scherk(p), EndAngle::PARALLEL, 0, p), DomainError);
  EXPECT_THROW(makeWeierstrassData(scherk(p), EndAngle::ORTHOGONAL, 1, p), DomainError);
}
