#include <gtest/gtest.h>

#include <sstream>

#include "hqr/fit_tables.hpp"

using namespace hqr;

TEST(FitTables, ShippedFileRoundTripsBitIdentically) {
  const auto& t = default_fit_tables();
  std::istringstream in(t.serialize());
  const auto back = FitTables::parse(in);
  EXPECT_TRUE(back == t);
  EXPECT_EQ(back.serialize(), t.serialize());
}

TEST(FitTables, ShippedValues) {
  const auto& t = default_fit_tables();
  for (const char* name : {"a", "b", "c", "d", "e", "f", "g", "h"}) {
    ASSERT_TRUE(t.has(name)) << name;
    EXPECT_EQ(t.table(name).rows, 5);
    EXPECT_EQ(t.table(name).cols, 3);
  }
  EXPECT_DOUBLE_EQ(t.at("a", 2, 3), -6.81);
  EXPECT_DOUBLE_EQ(t.at("b", 2, 3), 3.40);
  EXPECT_DOUBLE_EQ(t.at("b", 0, 1), 0.90);
  EXPECT_DOUBLE_EQ(t.at("b", 0, 2), 0.91);
  EXPECT_DOUBLE_EQ(t.at("b", 0, 3), 0.95);
  EXPECT_DOUBLE_EQ(t.vec("l", 3), 0.00542);
}

TEST(FitTables, AbsentEntriesNeverDereferenceSilently) {
  const auto& t = default_fit_tables();
  bool any_absent = false;
  for (int n = 0; n < 5; ++n)
    for (int m = 1; m <= 3; ++m)
      if (!t.present("g", n, m)) {
        any_absent = true;
        EXPECT_THROW(t.at("g", n, m), std::out_of_range);
      }
  EXPECT_TRUE(any_absent);
  EXPECT_THROW(t.at("a", 5, 1), std::out_of_range);
  EXPECT_THROW(t.at("a", 0, 0), std::out_of_range);
  EXPECT_THROW(t.at("zz", 0, 1), std::out_of_range);
  EXPECT_THROW(t.at("l", 0, 1), std::invalid_argument);
  EXPECT_THROW(t.vec("l", 0), std::out_of_range);
}

TEST(FitTables, ParserRejectsMalformedInput) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return FitTables::parse(in);
  };
  EXPECT_NO_THROW(parse("# c\nmatrix x 1 2\n1 -\nvector y 2\n3 4\n"));
  EXPECT_THROW(parse("matrix x 2 2\n1 2\n"), std::runtime_error);
  EXPECT_THROW(parse("matrix x 1 2\n1\n"), std::runtime_error);
  EXPECT_THROW(parse("matrix x 1 2\n1 2 3\n"), std::runtime_error);
  EXPECT_THROW(parse("matrix x 1 1\n1.2.3\n"), std::runtime_error);
  EXPECT_THROW(parse("table x 1 1\n1\n"), std::runtime_error);
  const auto t = parse("matrix x 1 2\n1 -\n");
  EXPECT_TRUE(t.present("x", 0, 1));
  EXPECT_FALSE(t.present("x", 0, 2));
}
