#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "arbc/error.hpp"
#include "arbc/image.hpp"

namespace arbc {

/// Projection angles θ_k = k·180/num_angles degrees, k = 0..num_angles-1.
struct RadonConfig {
  int num_angles = 8;

  double angle_degrees(int k) const { return k * (180.0 / num_angles); }
  void validate() const {
    if (num_angles < 1) throw Error(ErrorKind::InvalidConfig, "num_angles must be >= 1");
  }
};

/// One row per angle, one column per ρ bin (ascending ρ, centered on ρ = 0).
template <typename Scalar>
struct RadonFeaturesT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix projections;
  Vector angle_maxima;
  Matrix normalized;

  int num_angles() const { return static_cast<int>(projections.rows()); }
  int bins_per_angle() const { return static_cast<int>(projections.cols()); }
};

using RadonFeatures = RadonFeaturesT<double>;

/// B = 2·ceil(side·√2/2) + 1: enough unit-spaced bins for the image diagonal.
inline int radon_bin_count(int side) {
  return 2 * static_cast<int>(std::ceil(side * std::numbers::sqrt2 / 2.0)) + 1;
}

inline int feature_length(int side, const RadonConfig& config) {
  return config.num_angles * radon_bin_count(side);
}

namespace detail {

// Nearest-bin index offset for a signed ρ. Snapping to 1e-9 absorbs the
// rounding noise of cos/sin at multiples of 90°, so half-integer ties round
// away from zero symmetrically.
inline long nearest_bin_offset(double rho) {
  const double snapped = std::round(rho * 1e9) / 1e9;
  return std::lround(snapped);
}

}  // namespace detail

/// Discrete Radon transform by nearest-bin pixel binning. Pixel centers sit
/// at half-integer offsets from the image center (x to the right, y up);
/// each pixel adds its full intensity to the bin nearest ρ = x·cosθ + y·sinθ,
/// so every angle's projection sums to the image total.
template <typename Derived>
RadonFeaturesT<typename Derived::Scalar> radon_transform(const Eigen::MatrixBase<Derived>& image,
                                                         const RadonConfig& config) {
  using Scalar = typename Derived::Scalar;
  config.validate();
  const Eigen::Index side = image.rows();
  if (side != image.cols() || side < 2 || !is_power_of_two(side))
    throw Error(ErrorKind::InvalidSide, "radon input must be square with power-of-two side");

  const int bins = radon_bin_count(static_cast<int>(side));
  const long center = (bins - 1) / 2;
  const double half = side / 2.0;

  RadonFeaturesT<Scalar> out;
  out.projections = RadonFeaturesT<Scalar>::Matrix::Zero(config.num_angles, bins);
  for (int k = 0; k < config.num_angles; ++k) {
    const double theta = config.angle_degrees(k) * std::numbers::pi / 180.0;
    const double cs = std::cos(theta), sn = std::sin(theta);
    for (Eigen::Index r = 0; r < side; ++r) {
      const double y = half - (r + 0.5);
      for (Eigen::Index c = 0; c < side; ++c) {
        const double x = (c + 0.5) - half;
        const long bin = center + detail::nearest_bin_offset(x * cs + y * sn);
        out.projections(k, bin) += image(r, c);
      }
    }
  }
  out.angle_maxima = out.projections.rowwise().maxCoeff();
  return out;
}

inline RadonFeatures radon_transform(const NormalizedImage& image, const RadonConfig& config) {
  return radon_transform(image.pixels, config);
}

/// Divides each angle's projection by that angle's maximum; angles whose
/// maximum is zero stay all-zero.
template <typename Scalar>
RadonFeaturesT<Scalar>& normalize_projections(RadonFeaturesT<Scalar>& features) {
  features.angle_maxima = features.projections.rowwise().maxCoeff();
  features.normalized.resizeLike(features.projections);
  for (Eigen::Index k = 0; k < features.projections.rows(); ++k) {
    const Scalar peak = features.angle_maxima(k);
    if (peak > Scalar(0))
      features.normalized.row(k) = features.projections.row(k) / peak;
    else
      features.normalized.row(k).setZero();
  }
  return features;
}

/// Angle-major concatenation of the normalized projections (length n_θ·B).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flatten(const RadonFeaturesT<Scalar>& features) {
  if (features.normalized.size() != features.projections.size())
    throw Error(ErrorKind::InvalidArgument, "flatten requires normalized projections");
  // row-major storage already lays the bins out angle by angle
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(features.normalized.data(),
                                                                    features.normalized.size());
}

}  // namespace arbc
