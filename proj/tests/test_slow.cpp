#include <gtest/gtest.h>

#include <cmath>

#include "periodforge/geometry.hpp"
#include "periodforge/pipeline.hpp"

using namespace periodforge;

namespace {

Solution pinned(const FamilySpec& spec, const char* pin, int digits) {
  const Precision p(digits);
  SolveOptions o;
  o.initialPrecision = digits;
  o.pinName = "a1";
  o.pinValue = PrecReal(std::string_view(pin), p);
  return solvePeriodProblem(spec, defaultSeed(spec, p), o);
}

}  // namespace

TEST(Slow, GenusFifteenPar4n2MatchesTable) {
  const FamilySpec spec{FamilyKind::PAR_4N2, 3, 0};
  auto s = pinned(spec, "1e-12", 40);
  EXPECT_LE(s.residualNorm, pow10(-30, Precision(40)));
  const auto pub = pointParams(bundledPaperTable("par4n2_n3"), variableNames(spec), Precision(40));
  for (size_t k = 1; k < pub.size(); ++k) EXPECT_GE(agreementDigits(s.values[k], pub[k]), 8.0) << variableNames(spec)[k];
}

TEST(Slow, GenusFifteenPar4n3ConvergesFromTable) {
  // the printed table is not a solution, but it seeds one; the default seed stalls
  const FamilySpec spec{FamilyKind::PAR_4N3, 3, 0};
  const Precision p(30);
  SolveOptions o;
  o.initialPrecision = 30;
  o.pinName = "a1";
  o.pinValue = PrecReal(std::string_view("5e-13"), p);
  auto s = solvePeriodProblem(spec, pointParams(bundledPaperTable("par4n3_n3"), variableNames(spec), p), o);
  EXPECT_LE(s.residualNorm, pow10(-20, p));
  EXPECT_NO_THROW(checkOrdering(variableLayout(spec), s.values));
  const int need = static_cast<int>(std::ceil(-log10(s.residualNorm).toDouble()));
  const Precision pe(std::max(s.precisionUsed, need) + 15);
  std::vector<PrecReal> x;
  for (const auto& v : s.params) x.emplace_back(std::string_view(v), pe);
  const auto errs = handleClosureErrors(instantiate(spec, x, pe), pe);
  ASSERT_EQ(errs.size(), 15u);
  for (const auto& e : errs) EXPECT_LE(e, convert(s.residualNorm, pe) * 10L);
}

TEST(Slow, HighPrecisionTypeThreeFourRecertifies) {
  const FamilySpec spec{FamilyKind::TYPE_3_4, 0, 0};
  const Precision p(100);
  SolveOptions o;
  o.initialPrecision = 100;
  auto s = solvePeriodProblem(spec, defaultSeed(spec, p), o);
  EXPECT_TRUE(certify(recordFromSolution(s)).pass());
}
