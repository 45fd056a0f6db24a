#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "iconometer/csv.hpp"
#include "iconometer/digest.hpp"
#include "iconometer/error.hpp"
#include "iconometer/stats.hpp"
#include "iconometer/types.hpp"

using namespace iconometer;

TEST(FormatFixed, SixDecimalsAndNoNegativeZero) {
  EXPECT_EQ(format_fixed(0.5), "0.500000");
  EXPECT_EQ(format_fixed(-0.0), "0.000000");
  EXPECT_EQ(format_fixed(-0.0000001), "0.000000");
  EXPECT_EQ(format_fixed(-1.25), "-1.250000");
  EXPECT_EQ(format_fixed(std::optional<double>{}), "");
}

TEST(CsvWriter, QuotesWhenNeeded) {
  CsvWriter w({"a", "b"});
  w.row({"plain", "with,comma"});
  w.row({"say \"hi\"", "line\nbreak"});
  EXPECT_EQ(w.str(), "a,b\nplain,\"with,comma\"\n\"say \"\"hi\"\"\",\"line\nbreak\"\n");
  EXPECT_THROW(w.row({"one"}), ContractViolation);
}

TEST(ParseCsv, RoundTripsWriterOutput) {
  CsvWriter w({"x", "y"});
  w.row({"a,b", "c\"d"});
  w.row({"", "e"});
  const auto t = parse_csv(w.str());
  EXPECT_EQ(t.header, (std::vector<std::string>{"x", "y"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "a,b");
  EXPECT_EQ(t.rows[0][1], "c\"d");
  EXPECT_EQ(t.rows[1][0], "");
  EXPECT_EQ(*t.column("y"), 1u);
  EXPECT_FALSE(t.column("z").has_value());
}

TEST(ParseCsv, Errors) {
  EXPECT_THROW(parse_csv("a,b\n1\n"), FormatError);
  try {
    parse_csv("a\n\"open\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_EQ(parse_csv("a,b\r\n1,2\r\n").rows[0][1], "2");
}

TEST(Stats, SummaryUsesPopulationSd) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = summarize(v);
  EXPECT_DOUBLE_EQ(s->mean, 2.5);
  EXPECT_DOUBLE_EQ(s->sd, std::sqrt(1.25));
  EXPECT_EQ(s->min, 1);
  EXPECT_EQ(s->max, 4);
  EXPECT_FALSE(summarize(std::span<const double>{}).has_value());
  EXPECT_THROW(mean(std::span<const double>{}), ContractViolation);
}

TEST(Stats, BootstrapIsSeededAndBracketsMean) {
  const std::vector<double> v{0.1, 0.4, 0.2, 0.9, 0.5, 0.3};
  const auto a = bootstrap_mean_ci(v, 500, 7);
  const auto b = bootstrap_mean_ci(v, 500, 7);
  EXPECT_EQ(a.lower, b.lower);
  EXPECT_EQ(a.upper, b.upper);
  EXPECT_LE(a.lower, mean(v));
  EXPECT_GE(a.upper, mean(v));
  const std::vector<double> constant{2, 2, 2};
  const auto c = bootstrap_mean_ci(constant, 100, 1);
  EXPECT_EQ(c.lower, 2);
  EXPECT_EQ(c.upper, 2);
}

TEST(Digest, KnownVector) {
  const std::string abc = "abc";
  const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size());
  EXPECT_EQ(sha256_hex(bytes), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Thresholds, ValidateRanges) {
  Thresholds t;
  EXPECT_NO_THROW(t.validate());
  t.tau_align = 1.0;
  t.grid_side = 0;
  EXPECT_EQ(t.problems().size(), 2u);
  EXPECT_THROW(t.validate(), ContractViolation);
}

TEST(Enums, RoundTrip) {
  for (auto v : {Variant::kOriginal, Variant::kSynonym, Variant::kDescription}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_EQ(parse_category("dynamic"), Category::kDynamic);
  EXPECT_THROW(parse_category("moving"), ContractViolation);
}
