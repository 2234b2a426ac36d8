#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "arbc/error.hpp"

namespace arbc {

/// Logistic sigmoid, kept inside the open interval (0,1) even where the
/// floating-point result would saturate.
template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& t) {
  using Scalar = typename Derived::Scalar;
  constexpr Scalar lo = std::numeric_limits<Scalar>::min();
  constexpr Scalar hi = Scalar(1) - std::numeric_limits<Scalar>::epsilon() / 2;
  return ((Scalar(1) + (-t).exp()).inverse()).max(lo).min(hi);
}

/// Checks [d, h1, ..., hL, d]: at least one hidden layer, reconstruction
/// output, and consecutive hidden layers related by floor(h/2) or 2h.
inline void validate_architecture(const std::vector<int>& dims) {
  if (dims.size() < 3) throw Error(ErrorKind::InvalidArchitecture, "need input, >=1 hidden and output layer");
  for (int d : dims)
    if (d < 1) throw Error(ErrorKind::InvalidArchitecture, "layer sizes must be positive");
  if (dims.front() != dims.back())
    throw Error(ErrorKind::InvalidArchitecture, "output size must equal input size");
  for (std::size_t k = 2; k + 1 < dims.size(); ++k) {
    const int prev = dims[k - 1], cur = dims[k];
    if (cur != prev / 2 && cur != 2 * prev)
      throw Error(ErrorKind::InvalidArchitecture, "hidden layer " + std::to_string(k) + " (" + std::to_string(cur) +
                                                      ") must be half or double of " + std::to_string(prev));
  }
}

/// Fully-connected autoencoder with sigmoid units and untied weights.
/// Layer k maps a^k (size dims[k]) to a^{k+1} = s(W_k a^k + b_k).
template <typename Scalar_>
class Autoencoder {
 public:
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Autoencoder() = default;

  Autoencoder(std::vector<int> dims, std::vector<Matrix> weights, std::vector<Vector> biases)
      : dims_(std::move(dims)), weights_(std::move(weights)), biases_(std::move(biases)) {
    validate_architecture(dims_);
    const std::size_t layers = dims_.size() - 1;
    if (weights_.size() != layers || biases_.size() != layers)
      throw Error(ErrorKind::InvalidArchitecture, "expected " + std::to_string(layers) + " weight layers");
    for (std::size_t k = 0; k < layers; ++k) {
      if (weights_[k].rows() != dims_[k + 1] || weights_[k].cols() != dims_[k] || biases_[k].size() != dims_[k + 1])
        throw Error(ErrorKind::InvalidArchitecture, "layer " + std::to_string(k) + " shape mismatch");
    }
  }

  /// Zero weights and biases.
  static Autoencoder zeros(const std::vector<int>& dims) {
    validate_architecture(dims);
    std::vector<Matrix> w;
    std::vector<Vector> b;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
      w.push_back(Matrix::Zero(dims[k + 1], dims[k]));
      b.push_back(Vector::Zero(dims[k + 1]));
    }
    return Autoencoder(dims, std::move(w), std::move(b));
  }

  const std::vector<int>& layer_dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  int num_hidden_layers() const { return static_cast<int>(dims_.size()) - 2; }
  /// 1-based hidden layer size.
  int hidden_dim(int layer) const { return dims_.at(static_cast<std::size_t>(layer)); }

  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }
  std::vector<Matrix>& weights() { return weights_; }
  std::vector<Vector>& biases() { return biases_; }

  friend bool operator==(const Autoencoder& a, const Autoencoder& b) {
    if (a.dims_ != b.dims_) return false;
    for (std::size_t k = 0; k < a.weights_.size(); ++k)
      if (a.weights_[k] != b.weights_[k] || a.biases_[k] != b.biases_[k]) return false;
    return true;
  }

 private:
  std::vector<int> dims_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

using AutoencoderModel = Autoencoder<double>;

/// Weights ~ N(0,1)/sqrt(fan_in), biases ~ N(0,1), drawn layer by layer
/// (weights row by row, then biases) from a mt19937_64 seeded with `seed`.
template <typename Scalar = double>
Autoencoder<Scalar> init_model(const std::vector<int>& dims, std::uint64_t seed) {
  validate_architecture(dims);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<typename Autoencoder<Scalar>::Matrix> w;
  std::vector<typename Autoencoder<Scalar>::Vector> b;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const int rows = dims[k + 1], cols = dims[k];
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    typename Autoencoder<Scalar>::Matrix wk(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) wk(r, c) = static_cast<Scalar>(normal(rng) * scale);
    typename Autoencoder<Scalar>::Vector bk(rows);
    for (int r = 0; r < rows; ++r) bk(r) = static_cast<Scalar>(normal(rng));
    w.push_back(std::move(wk));
    b.push_back(std::move(bk));
  }
  return Autoencoder<Scalar>(dims, std::move(w), std::move(b));
}

/// Activations a^0 = x, a^1, ..., a^{L+1} = z.
template <typename Scalar, typename Derived>
std::vector<typename Autoencoder<Scalar>::Vector> forward(const Autoencoder<Scalar>& model,
                                                          const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != model.input_dim())
    throw Error(ErrorKind::DimensionMismatch,
                "input has " + std::to_string(x.size()) + " entries, model expects " + std::to_string(model.input_dim()));
  std::vector<typename Autoencoder<Scalar>::Vector> acts;
  acts.reserve(model.layer_dims().size());
  acts.emplace_back(x.template cast<Scalar>());
  for (int k = 0; k < model.num_layers(); ++k) {
    acts.emplace_back(sigmoid((model.weights()[k] * acts.back() + model.biases()[k]).array()).matrix());
  }
  return acts;
}

/// Squared reconstruction error ||x - z||^2.
template <typename DerivedX, typename DerivedZ>
typename DerivedX::Scalar loss(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedZ>& z) {
  if (x.size() != z.size()) throw Error(ErrorKind::DimensionMismatch, "loss operands differ in length");
  return (x - z).squaredNorm();
}

template <typename Scalar>
struct Gradients {
  std::vector<typename Autoencoder<Scalar>::Matrix> weights;
  std::vector<typename Autoencoder<Scalar>::Vector> biases;
};

/// Analytic gradient of the per-example cost ½||x - z||². The output delta
/// is (z - x)⊙z⊙(1 - z).
template <typename Scalar, typename Derived>
Gradients<Scalar> backprop(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  const auto acts = forward(model, x);
  const int layers = model.num_layers();
  Gradients<Scalar> g;
  g.weights.resize(layers);
  g.biases.resize(layers);

  const auto& z = acts.back();
  typename Autoencoder<Scalar>::Vector delta =
      ((z - acts.front()).array() * z.array() * (Scalar(1) - z.array())).matrix();
  for (int k = layers - 1; k >= 0; --k) {
    g.weights[k] = delta * acts[k].transpose();
    g.biases[k] = delta;
    if (k > 0) {
      const auto& a = acts[k];
      delta = ((model.weights()[k].transpose() * delta).array() * a.array() * (Scalar(1) - a.array())).matrix();
    }
  }
  return g;
}

struct TrainingConfig {
  int epochs = 300;
  int batch_size = 10;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  bool shuffle_each_epoch = true;

  void validate() const {
    if (epochs < 1) throw Error(ErrorKind::InvalidConfig, "epochs must be >= 1");
    if (batch_size < 1) throw Error(ErrorKind::InvalidConfig, "batch_size must be >= 1");
    if (!(learning_rate >= 0.0)) throw Error(ErrorKind::InvalidConfig, "learning_rate must be >= 0");
  }
};

/// Mini-batch SGD on the columns of `data` (one example per column).
/// Each step applies W ← W − (η/|batch|)·Σ∇W. Returns the per-epoch mean of
/// loss(x, z), measured on the forward pass that produced each update.
template <typename Scalar, typename Derived>
std::vector<double> train(Autoencoder<Scalar>& model, const Eigen::MatrixBase<Derived>& data,
                          const TrainingConfig& config,
                          const std::function<void(int, double)>& on_epoch = {}) {
  using Matrix = typename Autoencoder<Scalar>::Matrix;
  config.validate();
  if (data.cols() == 0) throw Error(ErrorKind::EmptyDataset, "training set is empty");
  if (data.rows() != model.input_dim())
    throw Error(ErrorKind::DimensionMismatch, "training vectors have length " + std::to_string(data.rows()) +
                                                  ", model expects " + std::to_string(model.input_dim()));

  const Eigen::Index n = data.cols();
  const int layers = model.num_layers();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(config.seed);

  std::vector<Matrix> acts(static_cast<std::size_t>(layers) + 1);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle_each_epoch) std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index m = std::min<Eigen::Index>(config.batch_size, n - start);
      Matrix& x = acts[0];
      x.resize(data.rows(), m);
      for (Eigen::Index j = 0; j < m; ++j) x.col(j) = data.col(order[static_cast<std::size_t>(start + j)]).template cast<Scalar>();
      for (int k = 0; k < layers; ++k) {
        acts[k + 1] = sigmoid(((model.weights()[k] * acts[k]).colwise() + model.biases()[k]).array()).matrix();
      }
      const Matrix& z = acts.back();
      epoch_loss += static_cast<double>((z - x).squaredNorm());

      Matrix delta = ((z - x).array() * z.array() * (Scalar(1) - z.array())).matrix();
      const Scalar step = static_cast<Scalar>(config.learning_rate / static_cast<double>(m));
      for (int k = layers - 1; k >= 0; --k) {
        Matrix next;
        if (k > 0) {
          const auto& a = acts[k];
          next = ((model.weights()[k].transpose() * delta).array() * a.array() * (Scalar(1) - a.array())).matrix();
        }
        model.weights()[k].noalias() -= step * delta * acts[k].transpose();
        model.biases()[k].noalias() -= step * delta.rowwise().sum();
        if (k > 0) delta = std::move(next);
      }
    }
    trace.push_back(epoch_loss / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch + 1, trace.back());
  }
  return trace;
}

/// Stacks equal-length feature vectors as columns.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> stack_columns(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& vectors) {
  if (vectors.empty()) throw Error(ErrorKind::EmptyDataset, "no feature vectors");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(vectors.front().size(),
                                                           static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != out.rows()) throw Error(ErrorKind::DimensionMismatch, "feature vectors differ in length");
    out.col(static_cast<Eigen::Index>(j)) = vectors[j];
  }
  return out;
}

}  // namespace arbc
