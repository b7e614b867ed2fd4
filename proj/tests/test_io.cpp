#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "msmux/errors.h"
#include "msmux/format.h"
#include "msmux/layout_io.h"
#include "msmux/records_io.h"
#include "msmux/table_io.h"

namespace msmux {
namespace {

const std::string kData = MSMUX_TEST_DATA_DIR;
const std::string kSource = MSMUX_SOURCE_DIR;

TEST(Format, SixSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333");
  EXPECT_EQ(format_number(35.714285714), "35.7143");
  EXPECT_EQ(format_number(INFINITY), "inf");
  EXPECT_EQ(format_number(NAN), "nan");
  EXPECT_EQ(format_optional(std::nullopt), "nan");
  EXPECT_TRUE(json_number(NAN).is_null());
  EXPECT_EQ(json_number(INFINITY), "inf");
  EXPECT_EQ(json_number(2.0 / 3.0).get<double>(), 0.666667);
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Records, JsonlAndCsvAgree) {
  const auto j = read_records_file(kData + "/three_records.jsonl");
  const auto c = read_records_file(kData + "/three_records.csv");
  ASSERT_EQ(j.size(), 3u);
  ASSERT_EQ(c.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(j[i].gap, c[i].gap);
    EXPECT_EQ(j[i].correct, c[i].correct);
  }
  EXPECT_EQ(attempts_from_records(j), 6u);
  EXPECT_EQ(attempts_from_records(c), 3u);
}

TEST(Records, ErrorsCarryRecordNumber) {
  try {
    read_records_file(kData + "/bad_records.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream unknown_key(R"({"gap": 1, "correct": true, "w0": 3})");
  EXPECT_THROW(read_records_jsonl(unknown_key), ParseError);
  std::istringstream missing(R"({"gap": 1})");
  EXPECT_THROW(read_records_jsonl(missing), ParseError);
  std::istringstream bad_header("gap,ok\n1,1\n");
  EXPECT_THROW(read_records_csv(bad_header), ParseError);
}

TEST(Records, JsonlRoundTrip) {
  std::vector<ShotRecord> r{{1.5, true, RecordSource::Synthetic, 4}, {0.0, false}};
  std::ostringstream os;
  write_records_jsonl(os, r);
  std::istringstream is(os.str());
  const auto back = read_records_jsonl(is);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].gap, 1.5);
  EXPECT_EQ(back[0].attempts_consumed, 4u);
  EXPECT_FALSE(back[1].correct);
}

TEST(Records, CurveCsv) {
  SweepCurve c;
  c.points.push_back({0.0, 2, 1, 2.0, 1.0 / 3.0, false, {}, {}});
  c.points.push_back({21.0, 0, 0, std::nullopt, std::nullopt, false, {}, {}});
  std::ostringstream os;
  write_curve_csv(os, c);
  EXPECT_EQ(os.str(),
            "G,kept_correct,kept_error,attempts,logical_error,extrapolated\n"
            "0,2,1,2,0.333333,0\n"
            "21,0,0,nan,nan,0\n");
}

TEST(Table, HeaderAliasesAndPercent) {
  std::ifstream in(kData + "/table_attempts.csv");
  const auto rows = read_table_csv(in, "table_attempts.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].attempts_single, 1.3632);
  EXPECT_EQ(rows[0].reduction_pct, 16.87);
  EXPECT_EQ(rows[1].reduction_pct, 78.69);
  EXPECT_FALSE(rows[0].discard_single.has_value());
}

TEST(Table, MalformedCellIsLineNumbered) {
  std::ifstream in(kData + "/table_bad.csv");
  try {
    read_table_csv(in, "table_bad.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream unknown("d1,p,Q\n3,1e-3,1\n");
  EXPECT_THROW(read_table_csv(unknown), ParseError);
}

TEST(Table, InfinityRenderedAsInf) {
  std::ifstream in(kData + "/table_saturated.csv");
  const auto results = reproduce_table(read_table_csv(in));
  std::ostringstream os;
  write_table_csv(os, results);
  EXPECT_NE(os.str().find(",inf,"), std::string::npos);
  EXPECT_EQ(table_json(results)[0]["computed"]["A1"], "inf");
}

TEST(Layout, ShippedDefinitionMatchesBuiltin) {
  const LayoutDefinition def = read_layout_definition(kSource + "/data/canonical_layout.txt");
  const PatchLayout parsed = def.to_layout();
  const PatchLayout builtin = canonical_layout();
  EXPECT_EQ(parsed.patch, builtin.patch);
  ASSERT_EQ(parsed.sites.size(), builtin.sites.size());
  for (std::size_t i = 0; i < parsed.sites.size(); ++i) {
    EXPECT_EQ(parsed.site_cells(i), builtin.site_cells(i));
    EXPECT_EQ(parsed.site_cells(i, Stage::Injection), builtin.site_cells(i, Stage::Injection));
  }
}

TEST(Layout, FormatParseRoundTrip) {
  const PatchLayout l = canonical_layout(Stage::Injection);
  std::istringstream in(format_layout_definition(l));
  const PatchLayout back = parse_layout_definition(in).to_layout();
  EXPECT_EQ(back.stage, Stage::Injection);
  EXPECT_EQ(validate_layout(back).idle_count, 357u);
}

TEST(Layout, ParseErrorLineNumber) {
  try {
    read_layout_definition(kData + "/bad_layout.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
  }
}

TEST(Layout, OverlapReportListsCells) {
  const PatchLayout l = read_layout_definition(kData + "/overlap_layout.txt").to_layout();
  const ValidationReport r = validate_layout(l);
  EXPECT_FALSE(r.nonoverlap_ok);
  const auto j = layout_report_json(l, r);
  ASSERT_EQ(j["violations"].size(), 1u);
  EXPECT_EQ(j["violations"][0]["kind"], "overlap");
  EXPECT_EQ(j["violations"][0]["sites"], nlohmann::json({1, 2}));
  // Overlap of [0,3)x[0,2) and [2,5)x[1,3) is the single cell (2, 1).
  EXPECT_EQ(j["violations"][0]["cells"], nlohmann::json::parse("[[2, 1]]"));
}

TEST(Layout, AsciiMap) {
  PatchLayout l;
  l.patch = CellSet::rectangle(0, 0, 4, 2).without({{3, 1}});
  FootprintSpec f{Stage::Cultivation, CellSet::rectangle(0, 0, 2, 1), 2};
  l.sites.push_back({{0, 0}, Rotation::R0, SiteFootprint({f})});
  // Trailing blanks are trimmed from each row.
  EXPECT_EQ(ascii_map(l), "...\n11..\n");
}

}  // namespace
}  // namespace msmux
