#include <gtest/gtest.h>

#include <filesystem>

#include "periodforge/pipeline.hpp"

using namespace periodforge;

namespace {

Solution solveRtw(const char* pin) {
  const FamilySpec spec{FamilyKind::RTW2, 0, 0};
  const Precision p(30);
  SolveOptions o;
  o.pinName = "a1";
  o.pinValue = PrecReal(std::string_view(pin), p);
  return solvePeriodProblem(spec, defaultSeed(spec, p), o);
}

}  // namespace

TEST(Pipeline, IdenticalSolvesGiveIdenticalRecords) {
  auto a = recordFromSolution(solveRtw("0.1"));
  auto b = recordFromSolution(solveRtw("0.1"));
  a.timestamp = b.timestamp = "";
  EXPECT_EQ(serialize(a), serialize(b));
}

TEST(Pipeline, RecordCarriesSolution) {
  const auto s = solveRtw("0.265");
  const auto r = recordFromSolution(s);
  EXPECT_EQ(r.provenance, Provenance::SOLVED);
  EXPECT_EQ(r.pinnedName, std::optional<std::string>("a1"));
  EXPECT_EQ(r.precisionUsed, s.precisionUsed);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_EQ(r.points[0].at("a2"), s.params[1]);
  EXPECT_TRUE(r.dependent.count("b"));
  EXPECT_TRUE(isDecimal(r.residualNorm));
  EXPECT_NO_THROW(parseRecord(serialize(r)));
}

TEST(Pipeline, SolvedRecordCertifies) {
  const auto r = recordFromSolution(solveRtw("0.265"));
  const auto c = certify(r);
  EXPECT_TRUE(c.pass());
  EXPECT_EQ(c.evaluationDigits, 40);
  EXPECT_EQ(c.tolerance, "1e-20");
}

TEST(Pipeline, PerturbedRecordFails) {
  auto r = recordFromSolution(solveRtw("0.265"));
  r.points[0]["a2"] = "0.28";
  EXPECT_FALSE(certify(r).pass());
}

TEST(Pipeline, OrderingViolationIsAFailedPoint) {
  // the printed a1 of the genus-12 table exceeds a2
  const auto c = certify(bundledPaperTable("par4n_n3"));
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_FALSE(c.points[0].pass);
  EXPECT_TRUE(c.points[0].maxResidual.empty());
  EXPECT_NE(c.points[0].message.find("a1 < a2"), std::string::npos);
}

TEST(Pipeline, ToleranceRule) {
  EXPECT_EQ(impliedToleranceExponent(30), 20);
  EXPECT_EQ(impliedToleranceExponent(60), 50);
  EXPECT_EQ(impliedToleranceExponent(16), 8);
}

TEST(Pipeline, SeedSources) {
  const Precision p(30);
  const FamilySpec t34{FamilyKind::TYPE_3_4, 0, 0};
  EXPECT_EQ(seedFromSource(t34, "default", p).size(), 7u);
  auto paper = seedFromSource(t34, "paper", p);
  EXPECT_EQ(toString(paper[0], 6), "3.66748e-13");
  EXPECT_THROW(seedFromSource({FamilyKind::WW_EVEN, 1, 0}, "paper", p), ConfigError);
  EXPECT_THROW(seedFromSource(t34, "guess", p), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "periodforge_seed_rtw.json";
  save(recordFromSolution(solveRtw("0.1")), path);
  auto fromFile = seedFromSource({FamilyKind::RTW2, 0, 0}, "file:" + path.string(), p);
  EXPECT_EQ(fromFile.size(), 2u);
  EXPECT_THROW(seedFromSource(t34, "file:" + path.string(), p), ConfigError);
}

TEST(Pipeline, ScheduleParsing) {
  const Precision p(30);
  auto s = parseSchedule("# pins\n1e-6\n\n  2e-6  # second\n3e-6\n", p);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(toString(s[1], 3), "2.00e-06");
  EXPECT_THROW(parseSchedule("1e-6\nabc\n", p), ParseError);
  EXPECT_THROW(parseSchedule("# nothing\n", p), ParseError);
}

TEST(Pipeline, LogSpacedSchedule) {
  const Precision p(30);
  auto s = logSpaced(PrecReal(1e-6, p), PrecReal(1e-2, p), 5, p);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_LE(abs(s[2] - PrecReal(1e-4, p)), pow10(-30, p) + PrecReal(1e-19, p));
  auto neg = logSpaced(PrecReal(-1e-6, p), PrecReal(-1e-4, p), 3, p);
  EXPECT_LT(neg[1].sign(), 0);
  EXPECT_THROW(logSpaced(PrecReal(1e-6, p), PrecReal(1e-4, p), 1, p), ConfigError);
}

TEST(Pipeline, RecordSources) {
  EXPECT_EQ(recordFromSource("bundled:rtw").name, "rtw");
  EXPECT_THROW(recordFromSource("bundled:zz"), ConfigError);
  EXPECT_THROW(recordFromSource("/nonexistent/record.json"), IoError);
}
