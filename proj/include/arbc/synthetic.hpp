#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "arbc/image.hpp"

namespace arbc {

/// Shape classes with class-specific placement, orientation and scale.
/// Each image jitters those parameters and adds Gaussian pixel noise.
struct SyntheticConfig {
  int num_classes = 8;
  int images_per_class = 50;
  int raster_side = 64;
  double position_jitter = 3.0;   // pixels
  double angle_jitter = 8.0;      // degrees
  double scale_jitter = 0.12;     // relative
  double noise_sigma = 20.0;      // 8-bit intensity units
  std::uint64_t seed = 1;
};

struct SyntheticImage {
  std::string image_id;
  int label = 0;
  std::string irma_code;
  Raster raster;
};

/// Hierarchical four-axis code for a class (coarse axes split classes by
/// halves and quarters, the leaf digit isolates the class).
std::string synthetic_code(int label);

/// Images interleaved by class: image i has label i % num_classes.
std::vector<SyntheticImage> generate_synthetic(const SyntheticConfig& config);

/// Writes PGM files plus train/test manifests; the first `train_count`
/// images go to train.tsv, the rest to test.tsv.
void write_synthetic(const std::vector<SyntheticImage>& images, std::size_t train_count,
                     const std::filesystem::path& dir);

}  // namespace arbc
