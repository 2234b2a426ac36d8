#include "arbc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace arbc {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int default_jobs() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

void EncoderSpec::validate() const {
  if (side < 2 || !is_power_of_two(side)) throw Error(ErrorKind::InvalidSide, "side " + std::to_string(side));
  radon.validate();
  if (method.method == BarcodeMethod::ARBC) {
    if (!model) throw Error(ErrorKind::InvalidConfig, "ARBC encoding needs a trained model");
    if (model->input_dim() != feature_length(side, radon))
      throw Error(ErrorKind::ConfigMismatch, "model input " + std::to_string(model->input_dim()) +
                                                 " != feature length " + std::to_string(feature_length(side, radon)) +
                                                 " for side " + std::to_string(side) + ", " +
                                                 std::to_string(radon.num_angles) + " angles");
  }
}

RadonFeatures image_features(const Raster& raster, int side, const RadonConfig& radon) {
  auto features = radon_transform(normalize_image(raster, side), radon);
  normalize_projections(features);
  return features;
}

Eigen::VectorXd feature_vector(const Raster& raster, int side, const RadonConfig& radon) {
  return flatten(image_features(raster, side, radon));
}

Barcode encode_image(const Raster& raster, const EncoderSpec& spec) {
  const auto features = image_features(raster, spec.side, spec.radon);
  if (spec.method.method == BarcodeMethod::RBC) return rbc_encode(features);
  if (!spec.model) throw Error(ErrorKind::InvalidConfig, "ARBC encoding needs a trained model");
  return arbc_encode(*spec.model, flatten(features), spec.method.layer.value_or(1));
}

namespace {

template <typename Fn>
auto with_image_id(const std::string& id, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "image " + id + ": " + e.what());
  }
}

}  // namespace

Eigen::MatrixXd manifest_features(const DatasetManifest& manifest, int side, const RadonConfig& radon, int jobs) {
  if (manifest.entries.empty()) throw Error(ErrorKind::EmptyDataset, "manifest has no entries");
  Eigen::MatrixXd out(feature_length(side, radon), static_cast<Eigen::Index>(manifest.entries.size()));
  parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    out.col(static_cast<Eigen::Index>(i)) =
        with_image_id(e.image_id, [&] { return feature_vector(load_grayscale(manifest.resolve(e)), side, radon); });
  });
  return out;
}

BarcodeIndex encode_manifest(const DatasetManifest& manifest, const EncoderSpec& spec, int jobs) {
  spec.validate();
  std::vector<Barcode> codes(manifest.entries.size());
  parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    codes[i] = with_image_id(e.image_id, [&] { return encode_image(load_grayscale(manifest.resolve(e)), spec); });
  });
  std::size_t length = 0;
  if (spec.method.method == BarcodeMethod::RBC)
    length = static_cast<std::size_t>(feature_length(spec.side, spec.radon));
  else
    length = static_cast<std::size_t>(spec.model->hidden_dim(spec.method.layer.value_or(1)));
  BarcodeIndex index(length, codes.empty() ? spec.method : codes.front().tag, spec.params());
  for (std::size_t i = 0; i < codes.size(); ++i) index.add(manifest.entries[i].image_id, std::move(codes[i]));
  return index;
}

std::vector<int> parse_architecture(const std::string& arch, int input_dim) {
  std::vector<int> dims{input_dim};
  std::size_t start = 0;
  while (start <= arch.size()) {
    std::size_t comma = arch.find(',', start);
    if (comma == std::string::npos) comma = arch.size();
    std::string token = arch.substr(start, comma - start);
    token.erase(std::remove_if(token.begin(), token.end(), [](unsigned char c) { return std::isspace(c); }), token.end());
    if (token.size() < 3 || token.rfind("h/", 0) != 0)
      throw Error(ErrorKind::InvalidArchitecture, "bad layer token '" + token + "' (expected h/2, h/4, ...)");
    int divisor = 0;
    try {
      std::size_t used = 0;
      divisor = std::stoi(token.substr(2), &used);
      if (used != token.size() - 2) divisor = 0;
    } catch (const std::exception&) {
      divisor = 0;
    }
    if (divisor < 2 || !is_power_of_two(divisor))
      throw Error(ErrorKind::InvalidArchitecture, "layer '" + token + "' must divide h by a power of two");
    const int size = input_dim / divisor;
    if (size < 1) throw Error(ErrorKind::InvalidArchitecture, "layer '" + token + "' is empty for h=" + std::to_string(input_dim));
    dims.push_back(size);
    start = comma + 1;
  }
  dims.push_back(input_dim);
  validate_architecture(dims);
  return dims;
}

std::vector<IrmaCode> manifest_codes(const DatasetManifest& manifest) {
  std::vector<IrmaCode> codes;
  codes.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    if (!e.irma_code) throw Error(ErrorKind::MissingCode, "image " + e.image_id + " has no IRMA code");
    codes.push_back(with_image_id(e.image_id, [&] { return parse_irma(*e.irma_code); }));
  }
  return codes;
}

ErrorReport evaluate_retrieval(const BarcodeIndex& train, const std::vector<IrmaCode>& train_codes,
                               const BarcodeIndex& test, const std::vector<IrmaCode>& test_codes,
                               const BranchingTable& table, int jobs) {
  if (train_codes.size() != train.size() || test_codes.size() != test.size())
    throw Error(ErrorKind::MissingCode, "code list does not match index size");
  if (test.empty()) throw Error(ErrorKind::EmptyDataset, "no test images");
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < train.size(); ++i) position.emplace(train.records()[i].image_id, i);

  std::vector<EvaluationPair> pairs(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t i) {
    const auto& rec = test.records()[i];
    const auto hit = search_exhaustive(train, rec.barcode, 1).front();
    pairs[i] = {rec.image_id, test_codes[i], train_codes[position.at(hit.image_id)]};
  });
  return total_error(pairs, table);
}

}  // namespace arbc
