#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "arbc/autoencoder.hpp"
#include "arbc/barcode.hpp"
#include "arbc/image.hpp"
#include "arbc/index.hpp"
#include "arbc/irma.hpp"
#include "arbc/radon.hpp"

namespace arbc {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is
/// processed exactly once; callers write into pre-sized slots so results do
/// not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency, at least 1.
int default_jobs();

struct EncoderSpec {
  int side = 32;
  RadonConfig radon;
  MethodTag method;
  const AutoencoderModel* model = nullptr;  // required for ARBC

  EncodingParams params() const { return {side, radon.num_angles}; }
  void validate() const;
};

/// normalize → Radon → per-angle normalization.
RadonFeatures image_features(const Raster& raster, int side, const RadonConfig& radon);
Eigen::VectorXd feature_vector(const Raster& raster, int side, const RadonConfig& radon);

Barcode encode_image(const Raster& raster, const EncoderSpec& spec);

/// Flattened features of every manifest image, one column per entry.
Eigen::MatrixXd manifest_features(const DatasetManifest& manifest, int side, const RadonConfig& radon, int jobs);

/// Encodes every manifest entry into an index in manifest order.
BarcodeIndex encode_manifest(const DatasetManifest& manifest, const EncoderSpec& spec, int jobs);

/// Layer sizes for an architecture string of comma-separated `h/2^k`
/// tokens (`h` is the input length), e.g. "h/2" or "h/2,h/4,h/2".
std::vector<int> parse_architecture(const std::string& arch, int input_dim);

std::vector<IrmaCode> manifest_codes(const DatasetManifest& manifest);

/// Top-1 exhaustive retrieval of each test barcode against `train`, scored
/// with the hierarchical error. Codes are looked up by image id.
ErrorReport evaluate_retrieval(const BarcodeIndex& train, const std::vector<IrmaCode>& train_codes,
                               const BarcodeIndex& test, const std::vector<IrmaCode>& test_codes,
                               const BranchingTable& table, int jobs);

}  // namespace arbc
