#include <random>

#include <gtest/gtest.h>

#include "arbc/radon.hpp"

using namespace arbc;

namespace {

NormalizedImage random_image(std::mt19937_64& rng, int side, bool dyadic = false) {
  NormalizedImage img;
  img.pixels.resize(side, side);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i)
    img.pixels.data()[i] = dyadic ? static_cast<double>(rng() % 257) / 256.0 : u(rng);
  return img;
}

// 90° counter-clockwise rotation: new(r, c) = old(c, side-1-r).
NormalizedImage rotate90(const NormalizedImage& img) {
  const int n = img.side();
  NormalizedImage out;
  out.pixels.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out.pixels(r, c) = img.pixels(c, n - 1 - r);
  return out;
}

}  // namespace

TEST(Radon, BinCountFormula) {
  EXPECT_EQ(radon_bin_count(32), 47);
  EXPECT_EQ(radon_bin_count(64), 93);
  EXPECT_EQ(radon_bin_count(2), 5);
  EXPECT_EQ(feature_length(32, RadonConfig{16}), 752);
  EXPECT_EQ(feature_length(32, RadonConfig{8}), 376);
}

TEST(Radon, ZeroImage) {
  NormalizedImage img;
  img.pixels = ImageMatrix::Zero(32, 32);
  const auto f = radon_transform(img, RadonConfig{8});
  EXPECT_EQ(f.num_angles(), 8);
  EXPECT_EQ(f.bins_per_angle(), 47);
  EXPECT_TRUE((f.projections.array() == 0.0).all());
}

TEST(Radon, PointMassNearCenter) {
  NormalizedImage img;
  img.pixels = ImageMatrix::Zero(32, 32);
  img.pixels(15, 16) = 1.0;  // pixel center at (0.5, 0.5)
  const auto f = radon_transform(img, RadonConfig{8});
  const int center = (f.bins_per_angle() - 1) / 2;
  for (int k = 0; k < 8; ++k) {
    EXPECT_DOUBLE_EQ(f.projections.row(k).sum(), 1.0);
    Eigen::Index at = 0;
    f.projections.row(k).maxCoeff(&at);
    EXPECT_LE(std::abs(at - center), 1) << "angle " << k;
  }
}

TEST(Radon, ConstantImageMassPerAngle) {
  NormalizedImage img;
  img.pixels = ImageMatrix::Ones(32, 32);
  const auto f = radon_transform(img, RadonConfig{16});
  for (int k = 0; k < 16; ++k) EXPECT_EQ(f.projections.row(k).sum(), 1024.0);
}

TEST(Radon, AxisAlignedProjectionOfConstantImage) {
  // θ = 0 projects onto x: every column lands in its own bin.
  NormalizedImage img;
  img.pixels = ImageMatrix::Ones(4, 4);
  const auto f = radon_transform(img, RadonConfig{2});
  ASSERT_EQ(f.bins_per_angle(), 7);
  // pixel x-centers −1.5, −0.5, 0.5, 1.5 round away from zero to −2, −1, 1, 2
  Eigen::RowVectorXd expected(7);
  expected << 0, 4, 4, 0, 4, 4, 0;
  EXPECT_EQ(f.projections.row(0), expected);
  EXPECT_EQ(f.projections.row(1), expected);
}

TEST(Radon, MassConservationRandom) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = random_image(rng, 32);
    const double total = img.pixels.sum();
    const auto f = radon_transform(img, RadonConfig{1 + static_cast<int>(rng() % 16)});
    for (int k = 0; k < f.num_angles(); ++k)
      EXPECT_NEAR(f.projections.row(k).sum(), total, 1e-9 * total);
    EXPECT_GE(f.projections.minCoeff(), 0.0);
  }
}

TEST(Radon, NinetyDegreeRotationConsistency) {
  std::mt19937_64 rng(9);
  const RadonConfig cfg{4};  // 0, 45, 90, 135
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = random_image(rng, 16, true);
    const auto a = radon_transform(img, cfg);
    const auto b = radon_transform(rotate90(img), cfg);
    for (int k = 0; k < 4; ++k) {
      const int shifted = (k + 2) % 4;
      // rotating the image by +90° maps its θ projection onto the original's θ−90°
      const Eigen::RowVectorXd rotated = b.projections.row(shifted);
      const Eigen::RowVectorXd original = a.projections.row(k);
      const bool direct = rotated == original;
      const bool reversed = rotated == original.reverse();
      EXPECT_TRUE(direct || reversed) << "angle index " << k;
    }
  }
}

TEST(Radon, NormalizeProjections) {
  RadonFeatures f;
  f.projections.resize(1, 3);
  f.projections << 0, 2, 4;
  normalize_projections(f);
  EXPECT_EQ(f.normalized(0, 0), 0.0);
  EXPECT_EQ(f.normalized(0, 1), 0.5);
  EXPECT_EQ(f.normalized(0, 2), 1.0);

  f.projections.setZero();
  normalize_projections(f);
  EXPECT_TRUE((f.normalized.array() == 0.0).all());
}

TEST(Radon, NormalizationMaximaArePerAngle) {
  RadonFeatures f;
  f.projections.resize(2, 2);
  f.projections << 1, 1, 0, 4;
  normalize_projections(f);
  // oracle: independent scan of each row's max
  for (int k = 0; k < 2; ++k) {
    double peak = 0;
    for (int i = 0; i < 2; ++i) peak = std::max(peak, f.projections(k, i));
    for (int i = 0; i < 2; ++i) EXPECT_EQ(f.normalized(k, i), f.projections(k, i) / peak);
  }
  EXPECT_EQ(f.normalized(0, 0), 1.0);
  EXPECT_EQ(f.normalized(0, 1), 1.0);
  EXPECT_EQ(f.normalized(1, 0), 0.0);
  EXPECT_EQ(f.normalized(1, 1), 1.0);
}

TEST(Radon, NormalizedRangeOnImages) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = radon_transform(random_image(rng, 32), RadonConfig{8});
    normalize_projections(f);
    EXPECT_GE(f.normalized.minCoeff(), 0.0);
    EXPECT_LE(f.normalized.maxCoeff(), 1.0);
    for (int k = 0; k < 8; ++k) EXPECT_EQ(f.normalized.row(k).maxCoeff(), 1.0);
  }
}

TEST(Radon, FlattenLayout) {
  RadonFeatures f;
  f.projections.resize(2, 3);
  f.projections << 1, 2, 3, 4, 5, 6;
  normalize_projections(f);
  const Eigen::VectorXd v = flatten(f);
  ASSERT_EQ(v.size(), 6);
  EXPECT_DOUBLE_EQ(v(0), 1.0 / 3);
  EXPECT_DOUBLE_EQ(v(2), 1.0);
  EXPECT_DOUBLE_EQ(v(3), 4.0 / 6);
  EXPECT_DOUBLE_EQ(v(5), 1.0);

  RadonFeatures single;
  single.projections.resize(1, 3);
  single.projections << 1, 2, 4;
  normalize_projections(single);
  EXPECT_EQ(flatten(single), single.normalized.row(0).transpose());
}

TEST(Radon, FlattenLengthAndDeterminism) {
  std::mt19937_64 rng(4);
  const auto img = random_image(rng, 32);
  auto a = radon_transform(img, RadonConfig{16});
  auto b = radon_transform(img, RadonConfig{16});
  normalize_projections(a);
  normalize_projections(b);
  EXPECT_EQ(flatten(a).size(), 752);
  EXPECT_EQ(a.projections, b.projections);
  EXPECT_EQ(flatten(a), flatten(b));
}

TEST(Radon, FloatScalarMatchesDouble) {
  std::mt19937_64 rng(8);
  const auto img = random_image(rng, 16, true);
  const auto d = radon_transform(img, RadonConfig{8});
  const auto f = radon_transform(img.pixels.cast<float>(), RadonConfig{8});
  EXPECT_TRUE(d.projections.cast<float>().isApprox(f.projections, 1e-5f));
}

TEST(Radon, RejectsBadInput) {
  EXPECT_THROW(radon_transform(ImageMatrix::Zero(3, 3), RadonConfig{8}), Error);
  EXPECT_THROW(radon_transform(ImageMatrix::Zero(4, 8), RadonConfig{8}), Error);
  EXPECT_THROW(radon_transform(ImageMatrix::Zero(4, 4), RadonConfig{0}), Error);
}
