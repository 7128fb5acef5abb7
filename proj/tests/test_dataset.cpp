#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "aew/dataset.hpp"
#include "aew/text.hpp"

namespace {

using aew::Dataset;
using aew::LabeledSample;

TEST(Text, FullPrecisionRoundTrips) {
  for (double v : {0.0, -0.0, 1.0, -1.5, 0.1, 1e-300, -3.141592653589793, 6.02214076e23,
                   0.06309573444801933}) {
    EXPECT_EQ(aew::parse_finite_double(aew::full_precision(v)), v);
  }
}

TEST(Text, ParseRejectsJunk) {
  EXPECT_THROW(aew::parse_finite_double(""), std::invalid_argument);
  EXPECT_THROW(aew::parse_finite_double("abc"), std::invalid_argument);
  EXPECT_THROW(aew::parse_finite_double("1.5x"), std::invalid_argument);
  EXPECT_THROW(aew::parse_finite_double("nan"), std::invalid_argument);
  EXPECT_THROW(aew::parse_finite_double("inf"), std::invalid_argument);
  EXPECT_THROW(aew::parse_finite_double("1e999"), std::invalid_argument);
}

TEST(Dataset, ValidatesShapeAndLabels) {
  EXPECT_THROW(Dataset({}), std::invalid_argument);
  EXPECT_THROW(Dataset({{{}, 1}}), std::invalid_argument);                    // zero-dim
  EXPECT_THROW(Dataset({{{0.5}, 0}}), std::invalid_argument);                 // bad label
  EXPECT_THROW(Dataset({{{0.5}, 2}}), std::invalid_argument);                 // bad label
  EXPECT_THROW(Dataset({{{0.5}, 1}, {{0.1, 0.2}, 1}}), std::invalid_argument);  // ragged
  EXPECT_THROW(Dataset({{{std::nan("")}, 1}}), std::invalid_argument);        // non-finite
  const Dataset d({{{0.5}, 1}, {{-0.25}, -1}});
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim(), 1u);
  EXPECT_EQ(d.y(1), -1);
  EXPECT_DOUBLE_EQ(d.x(0)[0], 0.5);
}

TEST(Dataset, HeadTail) {
  const Dataset d({{{1.0}, 1}, {{2.0}, -1}, {{3.0}, 1}, {{4.0}, -1}});
  const Dataset h = d.head(3);
  const Dataset t = d.tail(1);
  EXPECT_EQ(h.size(), 3u);
  EXPECT_DOUBLE_EQ(h.x(2)[0], 3.0);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t.x(0)[0], 4.0);
  EXPECT_THROW(d.head(0), std::invalid_argument);
  EXPECT_THROW(d.head(5), std::invalid_argument);
}

TEST(DatasetCsv, RoundTripsExactly) {
  const Dataset d({{{0.1, -0.2}, 1}, {{1e-300, 0.3}, -1}, {{-1.0 / 3.0, 2.0 / 3.0}, 1}});
  std::stringstream buf;
  aew::write_dataset_csv(d, buf);
  const Dataset back = aew::read_dataset_csv(buf);
  ASSERT_EQ(back.size(), d.size());
  ASSERT_EQ(back.dim(), d.dim());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.y(i), d.y(i));
    for (std::size_t k = 0; k < d.dim(); ++k) EXPECT_EQ(back.x(i)[k], d.x(i)[k]);
  }
}

TEST(DatasetCsv, HeaderIsStrict) {
  {
    std::stringstream in("x1,y\n0.5,1\n");
    EXPECT_EQ(aew::read_dataset_csv(in).size(), 1u);
  }
  {
    std::stringstream in("a,y\n0.5,1\n");
    EXPECT_THROW(aew::read_dataset_csv(in), std::invalid_argument);
  }
  {
    std::stringstream in("x1,x2,y\n0.5,1\n");  // row width mismatch
    EXPECT_THROW(aew::read_dataset_csv(in), std::invalid_argument);
  }
  {
    std::stringstream in("x1\n0.5\n");
    EXPECT_THROW(aew::read_dataset_csv(in), std::invalid_argument);
  }
}

TEST(DatasetCsv, LabelsAreLiteral) {
  {
    std::stringstream in("x1,y\n0.5,1\n-0.5,-1\n");
    const Dataset d = aew::read_dataset_csv(in);
    EXPECT_EQ(d.y(0), 1);
    EXPECT_EQ(d.y(1), -1);
  }
  for (const char* bad : {"x1,y\n0.5,2\n", "x1,y\n0.5,+1\n", "x1,y\n0.5,1.0\n"}) {
    std::stringstream in(bad);
    EXPECT_THROW(aew::read_dataset_csv(in), std::invalid_argument) << bad;
  }
}

TEST(DatasetCsv, ToleratesCrLfAndTrailingNewline) {
  std::stringstream in("x1,y\r\n0.25,1\r\n-0.75,-1\r\n\n");
  const Dataset d = aew::read_dataset_csv(in);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_DOUBLE_EQ(d.x(1)[0], -0.75);
}

}  // namespace
