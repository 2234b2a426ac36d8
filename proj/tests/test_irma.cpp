#include <random>

#include <gtest/gtest.h>

#include "arbc/error.hpp"
#include "arbc/irma.hpp"

using namespace arbc;

namespace {

BranchingTable uniform_table(int b) {
  BranchingTable t;
  for (int axis = 0; axis < 4; ++axis)
    for (int i = 0; i < 4; ++i) t.set(axis, i, b);
  return t;
}

const std::string kAlphabet = "0123456789abcdefghijklmnopqrstuvwxyz";

}  // namespace

TEST(ParseIrma, FigureCodes) {
  const auto c = parse_irma("1121-127-700-500");
  EXPECT_EQ(c.axes[0], "1121");
  EXPECT_EQ(c.axes[1], "127");
  EXPECT_EQ(c.axes[2], "700");
  EXPECT_EQ(c.axes[3], "500");
  EXPECT_EQ(c.raw(), "1121-127-700-500");

  const auto d = parse_irma("1121-4a0-914-700");
  EXPECT_EQ(d.axes[1][1], 'a');
}

TEST(ParseIrma, Malformed) {
  for (const char* bad : {"1121/127/700/500", "1121-127-700", "1121-127-700-500-1", "1121--700-500", "1121-1A7-700-500",
                          "11211-127-700-500", "1121-12-700-500", ""}) {
    try {
      parse_irma(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::MalformedCode) << bad;
    }
  }
}

TEST(Branching, DistinctFirstCharacters) {
  const auto t = build_branching({parse_irma("1121-127-700-500"), parse_irma("2121-127-700-500")});
  EXPECT_EQ(t.at(0, 0), 2);
  for (int i = 1; i < 4; ++i) EXPECT_EQ(t.at(0, i), 1);
  for (int axis = 1; axis < 4; ++axis)
    for (int i = 0; i < 3; ++i) EXPECT_EQ(t.at(axis, i), 1);
  EXPECT_FALSE(t.contains(1, 3));
}

TEST(Branching, SingleCodeAllOnes) {
  const auto t = build_branching({parse_irma("1121-4a0-914-700")});
  for (const auto& [key, count] : t.entries()) EXPECT_EQ(count, 1);
  EXPECT_EQ(t.entries().size(), 13u);
}

TEST(Branching, PrefixConditionedMaximum) {
  const auto counts = axis_branching({"1a", "1b", "2c"});
  EXPECT_EQ(counts, (std::vector<int>{2, 2}));
  EXPECT_EQ(axis_branching({"1a", "2b", "3c"}), (std::vector<int>{3, 1}));
  EXPECT_THROW(build_branching({}), Error);
}

TEST(Delta, Propagation) {
  EXPECT_EQ(delta_vector("1121", "1121"), (std::vector<int>{0, 0, 0, 0}));
  EXPECT_EQ(delta_vector("1121", "1131"), (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(delta_vector("1121", "2121"), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_THROW(delta_vector("112", "1121"), Error);
}

TEST(ImageError, WorkedExamples) {
  const auto table = uniform_table(10);
  const auto truth = parse_irma("1121-127-700-500");
  EXPECT_EQ(image_error(truth, truth, table), 0.0);
  EXPECT_NEAR(image_error(truth, parse_irma("1131-127-700-500"), table), 7.0 / 120.0, 1e-12);
  const double all = 0.1 * (1 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4) + 3 * 0.1 * (1 + 1.0 / 2 + 1.0 / 3);
  EXPECT_NEAR(image_error(truth, parse_irma("2121-227-800-600"), table), all, 1e-12);
  EXPECT_NEAR(all, 0.75833, 1e-5);
}

TEST(ImageError, MissingEntryAndLengthMismatch) {
  BranchingTable partial;
  partial.set(0, 0, 2);
  try {
    image_error(parse_irma("1121-127-700-500"), parse_irma("1121-127-700-500"), partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingBranchEntry);
  }
  try {
    image_error(parse_irma("1121-127-700-500"), parse_irma("1121-1270-700-500"), uniform_table(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(ImageError, MonotoneInMismatches) {
  std::mt19937_64 rng(6);
  BranchingTable table;
  for (int axis = 0; axis < 4; ++axis)
    for (int i = 0; i < 4; ++i) table.set(axis, i, 1 + static_cast<int>(rng() % 12));
  auto random_code = [&] {
    IrmaCode c;
    for (int axis = 0; axis < 4; ++axis) {
      const int len = axis == 0 ? 4 : 3;
      for (int i = 0; i < len; ++i) c.axes[axis] += kAlphabet[rng() % 4];
    }
    return c;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const IrmaCode truth = random_code();
    IrmaCode retrieved = random_code();
    const double before = image_error(truth, retrieved, table);
    EXPECT_GE(before, 0.0);
    // force one more position to mismatch
    const int axis = static_cast<int>(rng() % 4);
    auto& s = retrieved.axes[axis];
    const std::size_t pos = rng() % s.size();
    s[pos] = truth.axes[axis][pos] == 'z' ? 'y' : 'z';
    EXPECT_GE(image_error(truth, retrieved, table), before);
    for (int a = 0; a < 4; ++a) {
      const auto delta = delta_vector(truth.axes[a], retrieved.axes[a]);
      EXPECT_TRUE(std::is_sorted(delta.begin(), delta.end()));
    }
  }
}

TEST(ImageError, ShallowMismatchesCostMore) {
  const auto table = uniform_table(7);
  const auto truth = parse_irma("1121-127-700-500");
  double previous = 1e9;
  for (int h = 0; h < 4; ++h) {
    IrmaCode r = truth;
    r.axes[0][h] = 'x';
    const double e = image_error(truth, r, table);
    EXPECT_LT(e, previous);
    previous = e;
  }
}

TEST(TotalError, AdditiveAndOrderFree) {
  const auto table = uniform_table(10);
  const auto a = parse_irma("1121-127-700-500"), b = parse_irma("1131-127-700-500");
  const auto r = total_error({{"x", a, b}, {"y", a, b}}, table);
  EXPECT_NEAR(r.total_error, 7.0 / 60.0, 1e-12);
  EXPECT_EQ(r.num_images(), 2u);
  EXPECT_EQ(total_error({{"x", a, a}, {"y", b, b}}, table).total_error, 0.0);
  EXPECT_EQ(total_error({{"x", a, b}}, table).total_error, image_error(a, b, table));
  EXPECT_THROW(total_error({}, table), Error);

  const auto c = parse_irma("2121-227-800-600");
  const auto fwd = total_error({{"1", a, b}, {"2", a, c}, {"3", c, b}}, table);
  const auto rev = total_error({{"3", c, b}, {"2", a, c}, {"1", a, b}}, table);
  EXPECT_NEAR(fwd.total_error, rev.total_error, 1e-12);
}
