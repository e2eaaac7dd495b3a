#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "periodforge/numerics.hpp"

using namespace periodforge;

namespace {

// 80 digits of pi, for comparison only
const char* kPi80 = "3.1415926535897932384626433832795028841971693993751058209749445923078164062862090";

}  // namespace

TEST(Numerics, PiAtFiftyDigits) {
  const Precision p(50);
  const PrecReal ref(std::string_view(kPi80), Precision(90));
  EXPECT_GE(agreementDigits(convert(pi(p), Precision(90)), ref), 50.0);
}

TEST(Numerics, PiAgreesWithBoostConstant) {
  using dec100 = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<100>>;
  const std::string boostPi = boost::math::constants::pi<dec100>().str(95);
  const Precision p(90);
  EXPECT_GE(agreementDigits(pi(p), PrecReal(std::string_view(boostPi), p)), 88.0);
}

TEST(Numerics, OneThirdToTenDigits) {
  const Precision p(10);
  PrecReal third = PrecReal(1L, p) / PrecReal(3L, p);
  EXPECT_EQ(toString(third, 10), "3.333333333e-01");
}

TEST(Numerics, SqrtTwoSquared) {
  const Precision p(30);
  PrecReal s = sqrt(PrecReal(2L, p));
  EXPECT_LE(abs(s * s - PrecReal(2L, p)), pow10(-28, p));
}

TEST(Numerics, PrecisionBelowMinimumIsConfigError) {
  EXPECT_THROW(Precision(9), ConfigError);
  EXPECT_NO_THROW(Precision(10));
}

TEST(Numerics, DecimalParsing) {
  const Precision p(40);
  PrecReal a(std::string_view("-3.6676e-13"), p);
  EXPECT_LT(a.sign(), 0);
  EXPECT_NEAR(a.toDouble(), -3.6676e-13, 1e-27);
  PrecReal b(std::string_view(".9007"), p);
  EXPECT_NEAR(b.toDouble(), 0.9007, 1e-16);
  EXPECT_THROW(PrecReal(std::string_view("1.2.3"), p), ParseError);
  EXPECT_THROW(PrecReal(std::string_view(""), p), ParseError);
}

TEST(Numerics, MixedPrecisionTakesTheSmaller) {
  PrecReal a(1L, Precision(20)), b(1L, Precision(60));
  EXPECT_EQ((a + b).bits(), Precision(20).bits());
}

TEST(Numerics, ComplexSqrtBranch) {
  const Precision p(30);
  // C99 convention: sqrt(-4 - 0i) = -2i, sqrt(-4 + 0i) = 2i
  PrecReal zero(p);
  PrecReal negZero = -zero;
  auto up = sqrt(PrecComplex(PrecReal(-4L, p), zero));
  auto down = sqrt(PrecComplex(PrecReal(-4L, p), negZero));
  EXPECT_NEAR(up.im().toDouble(), 2.0, 1e-25);
  EXPECT_NEAR(down.im().toDouble(), -2.0, 1e-25);
  PrecComplex z(PrecReal(3L, p), PrecReal(4L, p));
  EXPECT_NEAR(abs(z).toDouble(), 5.0, 1e-25);
  auto r = sqrt(z);
  auto back = r * r;
  EXPECT_LE(abs(back - z), pow10(-28, p));
}

TEST(Numerics, AgreementDigits) {
  const Precision p(30);
  PrecReal a(std::string_view("1.0000000001"), p);
  EXPECT_NEAR(agreementDigits(a, PrecReal(1L, p)), 10.0, 0.05);
}
