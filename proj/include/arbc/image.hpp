#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace arbc {

/// Decoded grayscale raster, row-major. `max_value` is 255 for 8-bit
/// sources and 65535 for 16-bit ones.
struct Raster {
  int width = 0;
  int height = 0;
  int max_value = 255;
  std::vector<std::uint16_t> pixels;

  std::uint16_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

using ImageMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Square raster with power-of-two side and intensities in [0,1].
/// `pixels(row, col)`; row 0 is the top of the image.
struct NormalizedImage {
  ImageMatrix pixels;

  int side() const { return static_cast<int>(pixels.rows()); }
};

bool is_power_of_two(long long value) noexcept;

/// Decodes PGM (P5, and P2 for convenience), PPM (P6) and, when built with
/// libpng, PNG. Color is reduced to luminance with 0.299/0.587/0.114.
Raster load_grayscale(const std::filesystem::path& path);

/// Decodes an in-memory PNM byte stream.
Raster decode_pnm(const std::string& bytes);

/// Writes an 8-bit binary PGM (P5). 16-bit rasters are written with maxval 65535.
void save_pgm(const Raster& raster, const std::filesystem::path& path);

/// Bilinear resample to `target_side`×`target_side` (anisotropic when the
/// source is not square), then scale by 1/max_value into [0,1].
NormalizedImage normalize_image(const Raster& raster, int target_side);

/// Quantizes a normalized image back to an 8-bit raster.
Raster to_raster(const NormalizedImage& image);

struct ManifestEntry {
  std::string image_id;
  std::string image_path;
  std::optional<std::string> irma_code;
};

/// Ordered (image_id, path, optional IRMA code) list. Relative paths are
/// resolved against `base_dir`.
struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const ManifestEntry& entry) const;
};

/// Parses `image_id<TAB>relative_path<TAB>irma_code` lines; `#` comments and
/// blank lines are skipped. Duplicate ids are rejected.
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace arbc
