#include <gtest/gtest.h>

#include <filesystem>

#include "periodforge/store.hpp"
#include "periodforge/families.hpp"

using namespace periodforge;

namespace {

std::filesystem::path tempPath(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "periodforge_store_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string replaceOnce(std::string s, const std::string& from, const std::string& to) {
  auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST(Store, TableRoundTripIsByteIdentical) {
  const auto r = bundledPaperTable("type34");
  const auto path = tempPath("type34.json");
  save(r, path);
  const auto back = load(path);
  EXPECT_EQ(back, r);
  EXPECT_EQ(serialize(back), serialize(r));
  EXPECT_EQ(readFile(path), serialize(r));
}

TEST(Store, EveryBundledTableRoundTrips) {
  for (const auto& r : bundledPaperTables()) {
    EXPECT_EQ(parseRecord(serialize(r)), r) << r.name;
    EXPECT_EQ(r.provenance, Provenance::PAPER_TABLE);
    EXPECT_NO_THROW(pointParams(r, variableNames(r.spec), Precision(30))) << r.name;
  }
}

TEST(Store, CanonicalForm) {
  const auto text = serialize(bundledPaperTable("rtw"));
  EXPECT_EQ(text.back(), '\n');
  // sorted keys, two-space indent
  EXPECT_LT(text.find("\"certifying\""), text.find("\"family\""));
  EXPECT_LT(text.find("\"family\""), text.find("\"timestamp\""));
  EXPECT_EQ(text.substr(0, 4), "{\n  ");
}

TEST(Store, TruncatedDecimalNamesField) {
  const auto r = bundledPaperTable("type34");
  std::string text = replaceOnce(serialize(r), "\"3.66747800575903677425103971726819961446108179191850037756971821e-13\"",
                                 "\"3.667478005759e-\"");
  try {
    parseRecord(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("points[0].a1"), std::string::npos) << e.what();
  }
}

TEST(Store, MalformedInputs) {
  EXPECT_THROW(parseRecord("{"), ParseError);
  EXPECT_THROW(parseRecord("{}"), ParseError);
  const std::string good = serialize(bundledPaperTable("rtw"));
  EXPECT_THROW(parseRecord(replaceOnce(good, "\"schemaVersion\": 1", "\"schemaVersion\": 7")), ParseError);
  EXPECT_THROW(parseRecord(replaceOnce(good, "\"PAPER_TABLE\"", "\"GUESSED\"")), ParseError);
  EXPECT_THROW(parseRecord(replaceOnce(good, "\"kind\": \"rtw\"", "\"kind\": \"nope\"")), ParseError);
  EXPECT_THROW(parseRecord(replaceOnce(good, "\"precisionUsed\": 16", "\"precisionUsed\": \"16\"")), ParseError);
}

TEST(Store, MissingFileIsIoError) {
  EXPECT_THROW(load(tempPath("does_not_exist.json")), IoError);
  EXPECT_THROW(save(bundledPaperTable("rtw"), "/nonexistent_dir_xyz/r.json"), IoError);
}

TEST(Store, UnknownBundledKey) { EXPECT_THROW(bundledPaperTable("type99"), ConfigError); }

TEST(Store, PointLookup) {
  const auto r = bundledPaperTable("rtw");
  const Precision p(30);
  auto x = pointParams(r, {"a1", "a2"}, p, 2);
  EXPECT_EQ(toString(x[0], 3), "2.65e-01");
  EXPECT_THROW(pointParams(r, {"a1", "a2"}, p, 3), ParseError);
  EXPECT_THROW(pointParams(r, {"a1", "zz"}, p), ParseError);
}

TEST(Store, DecimalGrammar) {
  for (const char* ok : {"1", "-0.5", ".9007", "3.6e-13", "1E+5", "7."}) EXPECT_TRUE(isDecimal(ok)) << ok;
  for (const char* bad : {"", "-", "e5", "1e", "1.2.3", "0x10", "nan", " 1"}) EXPECT_FALSE(isDecimal(bad)) << bad;
}
