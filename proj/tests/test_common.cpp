#include <gtest/gtest.h>

#include <set>

#include "featrank/common.hpp"

using namespace featrank;

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(1), "0000000000000001");
}

TEST(Rmse, MatchesHandComputation) {
  const std::vector<double> p = {1.0, 2.0, 3.0};
  const std::vector<double> a = {1.0, 4.0, 0.0};
  EXPECT_DOUBLE_EQ(rmse(p, a), std::sqrt((0.0 + 4.0 + 9.0) / 3.0));
  EXPECT_THROW(rmse(p, std::vector<double>{1.0}), EncodingMismatch);
}

TEST(Mean, Basic) {
  EXPECT_DOUBLE_EQ(mean(std::vector<double>{1, 2, 3, 6}), 3.0);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Trim, StripsAsciiWhitespace) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(trim("   "), "");
}

TEST(Rng, SameSeedSameStream) {
  Rng a(7), b(7), c(8);
  std::vector<double> va, vb, vc;
  for (int i = 0; i < 10; ++i) {
    va.push_back(a.uniform(0, 1));
    vb.push_back(b.uniform(0, 1));
    vc.push_back(c.uniform(0, 1));
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
}

TEST(Rng, NormalWithZeroSigmaIsExact) {
  Rng r(1);
  EXPECT_EQ(r.normal(3.5, 0.0), 3.5);
}

TEST(Rng, PermutationIsAPermutation) {
  Rng r(3);
  auto p = r.permutation(50);
  std::set<std::size_t> s(p.begin(), p.end());
  EXPECT_EQ(s.size(), 50u);
  EXPECT_EQ(*s.rbegin(), 49u);
}

TEST(Rng, SampleWithoutReplacementSortedDistinct) {
  Rng r(5);
  auto s = r.sample_without_replacement(100, 30);
  ASSERT_EQ(s.size(), 30u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 30u);
  EXPECT_EQ(r.sample_without_replacement(4, 4), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Matrix, SelectAndAppendRows) {
  Matrix m(0, 2);
  m.append_row(std::vector<double>{1, 2});
  m.append_row(std::vector<double>{3, 4});
  m.append_row(std::vector<double>{5, 6});
  EXPECT_EQ(m.rows(), 3u);
  const Matrix s = m.select_rows(std::vector<std::size_t>{2, 0});
  EXPECT_EQ(s(0, 0), 5);
  EXPECT_EQ(s(1, 1), 2);
}
