#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "arbc/autoencoder.hpp"
#include "arbc/error.hpp"
#include "arbc/radon.hpp"

namespace arbc {

/// Fixed-length bit vector packed into 64-bit words; unused tail bits are zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const { return size_; }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i, bool value = true) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (value)
      words_[i / 64] |= mask;
    else
      words_[i / 64] &= ~mask;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }

  /// '0'/'1' characters, position 0 first.
  std::string to_string() const;
  static BitVector from_string(std::string_view bits);

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class BarcodeMethod { RBC, ARBC };

/// Encoding method plus the 1-based hidden layer for ARBC ("RBC", "ARBC:2").
struct MethodTag {
  BarcodeMethod method = BarcodeMethod::RBC;
  std::optional<int> layer;

  std::string to_string() const;
  static MethodTag parse(std::string_view text);
  friend bool operator==(const MethodTag&, const MethodTag&) = default;
};

struct Barcode {
  BitVector bits;
  MethodTag tag;

  std::size_t length() const { return bits.size(); }
  friend bool operator==(const Barcode&, const Barcode&) = default;
};

/// Median of the nonzero entries (mean of the middle pair for even counts);
/// nullopt when every entry is zero.
template <typename Derived>
std::optional<typename Derived::Scalar> nonzero_median(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> nz;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) != Scalar(0)) nz.push_back(values(i));
  if (nz.empty()) return std::nullopt;
  const std::size_t mid = nz.size() / 2;
  std::nth_element(nz.begin(), nz.begin() + static_cast<std::ptrdiff_t>(mid), nz.end());
  const Scalar upper = nz[mid];
  if (nz.size() % 2 == 1) return upper;
  const Scalar lower = *std::max_element(nz.begin(), nz.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / Scalar(2);
}

/// Classical Radon barcode: per angle, bit = raw ≥ median of the angle's
/// nonzero raw values; an all-zero angle yields zero bits.
template <typename Scalar>
Barcode rbc_encode(const RadonFeaturesT<Scalar>& features) {
  const Eigen::Index angles = features.projections.rows(), bins = features.projections.cols();
  Barcode out{BitVector(static_cast<std::size_t>(angles * bins)), MethodTag{BarcodeMethod::RBC, std::nullopt}};
  for (Eigen::Index k = 0; k < angles; ++k) {
    const auto row = features.projections.row(k);
    const auto threshold = nonzero_median(row);
    if (!threshold) continue;
    for (Eigen::Index i = 0; i < bins; ++i)
      if (row(i) >= *threshold) out.bits.set(static_cast<std::size_t>(k * bins + i));
  }
  return out;
}

/// Bit j = 1 iff activation_j ≥ 0.5.
template <typename Derived>
BitVector threshold_activations(const Eigen::MatrixBase<Derived>& activations) {
  using Scalar = typename Derived::Scalar;
  BitVector bits(static_cast<std::size_t>(activations.size()));
  for (Eigen::Index j = 0; j < activations.size(); ++j)
    if (activations(j) >= Scalar(0.5)) bits.set(static_cast<std::size_t>(j));
  return bits;
}

/// Autoencoded Radon barcode from hidden layer `layer` (1-based).
template <typename Scalar, typename Derived>
Barcode arbc_encode(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& input, int layer) {
  if (layer < 1 || layer > model.num_hidden_layers())
    throw Error(ErrorKind::LayerOutOfRange, "layer " + std::to_string(layer) + " not in 1.." +
                                                std::to_string(model.num_hidden_layers()));
  if (input.size() != model.input_dim())
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(input.size()) +
                                                  " entries, model expects " + std::to_string(model.input_dim()));
  // only the encoder prefix up to `layer` is needed
  typename Autoencoder<Scalar>::Vector a = input.template cast<Scalar>();
  for (int k = 0; k < layer; ++k) a = sigmoid((model.weights()[k] * a + model.biases()[k]).array()).matrix();
  return Barcode{threshold_activations(a), MethodTag{BarcodeMethod::ARBC, layer}};
}

std::size_t hamming_distance(const BitVector& a, const BitVector& b);
std::size_t hamming_distance(const Barcode& a, const Barcode& b);

}  // namespace arbc
