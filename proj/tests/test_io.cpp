#include "laglan/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace laglan {
namespace {

TEST(FormatDouble, RoundTripsExactly) {
  const double values[] = {0.0,
                           1.0 / 3.0,
                           -2.5e-17,
                           1e-300,
                           std::numeric_limits<double>::max(),
                           std::numeric_limits<double>::denorm_min(),
                           M_PI,
                           -123456.78901234567};
  for (double x : values) {
    const std::string text = format_double(x);
    EXPECT_EQ(std::strtod(text.c_str(), nullptr), x) << text;
  }
}

TEST(Csv, WriteReadRoundTrip) {
  CsvTable table;
  table.comments = {"run: demo", "seed: 7"};
  table.header = {"n", "value", "err"};
  table.rows = {{128.0, 1.0 / 3.0, 1e-300},
                {256.0, -M_PI, std::numeric_limits<double>::max()}};

  std::stringstream ss;
  write_csv(ss, table);
  const CsvTable back = read_csv(ss);

  EXPECT_EQ(back.comments, table.comments);
  EXPECT_EQ(back.header, table.header);
  ASSERT_EQ(back.rows.size(), table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    ASSERT_EQ(back.rows[i].size(), table.rows[i].size());
    for (std::size_t j = 0; j < table.rows[i].size(); ++j) {
      EXPECT_EQ(back.rows[i][j], table.rows[i][j]) << i << "," << j;
    }
  }
}

TEST(Csv, RejectsMalformedInput) {
  {
    std::stringstream ss("a,b\n1.0\n");
    EXPECT_THROW(read_csv(ss), std::runtime_error);
  }
  {
    std::stringstream ss("a,b\n1.0,zebra\n");
    EXPECT_THROW(read_csv(ss), std::runtime_error);
  }
  {
    CsvTable table;
    table.header = {"a", "b"};
    table.rows = {{1.0}};
    std::stringstream ss;
    EXPECT_THROW(write_csv(ss, table), std::runtime_error);
  }
}

TEST(Csv, SkipsBlankLinesAndParsesSpecials) {
  std::stringstream ss("# note\nx\n\ninf\n-inf\nnan\n");
  const CsvTable table = read_csv(ss);
  EXPECT_EQ(table.comments, std::vector<std::string>{"note"});
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_TRUE(std::isinf(table.rows[0][0]));
  EXPECT_LT(table.rows[1][0], 0.0);
  EXPECT_TRUE(std::isnan(table.rows[2][0]));
}

}  // namespace
}  // namespace laglan
