#include <gtest/gtest.h>

#include "moocrep/config.hpp"
#include "moocrep/error.hpp"

namespace moocrep {
namespace {

TEST(Config, ParsesTrimsAndOverrides) {
  const Config cfg = Config::parse("# comment\n d = 16 \n\nlr=0.003 # trailing\nd=32\n");
  EXPECT_EQ(cfg.get_uint("d", 0), 32u);
  EXPECT_EQ(cfg.get_double("lr", 0), 0.003);
  EXPECT_EQ(cfg.get_string("missing", "x"), "x");
  EXPECT_FALSE(cfg.get("missing").has_value());
}

TEST(Config, RejectsMalformedLinesWithLocation) {
  try {
    Config::parse("a=1\nnot a pair\n", "run.cfg");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Config::parse("=3\n"), ValidationError);
}

TEST(Config, TypedGettersValidate) {
  const Config cfg = Config::parse("n=-3\nx=abc\n");
  EXPECT_THROW(cfg.get_uint("n", 0), ValidationError);
  EXPECT_THROW(cfg.get_double("x", 0), ValidationError);
}

TEST(Config, TextIsSortedAndHashIsStable) {
  Config a;
  a.set("b", "2");
  a.set("a", "1");
  EXPECT_EQ(a.to_text(), "a=1\nb=2\n");
  Config b = Config::parse("b=2\na=1\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.set("a", "3");
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, FormatDoubleRoundTrips) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(third)), third);
}

}  // namespace
}  // namespace moocrep
