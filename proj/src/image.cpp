#include "arbc/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#ifdef ARBC_HAVE_PNG
#include <png.h>
#endif

#include "arbc/error.hpp"
#include "arbc/store.hpp"

namespace arbc {

namespace fs = std::filesystem;

bool is_power_of_two(long long value) noexcept { return value > 0 && (value & (value - 1)) == 0; }

namespace {

std::uint16_t luminance(double r, double g, double b) {
  return static_cast<std::uint16_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

class PnmReader {
 public:
  explicit PnmReader(const std::string& bytes) : bytes_(bytes) {}

  std::string magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P') throw Error(ErrorKind::UnsupportedFormat, "not a PNM stream");
    pos_ = 2;
    return bytes_.substr(0, 2);
  }

  long header_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_])))
      throw Error(ErrorKind::CorruptImage, "bad PNM header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000) throw Error(ErrorKind::CorruptImage, "PNM header value out of range");
    }
    return v;
  }

  // exactly one whitespace byte separates the header from binary data
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      throw Error(ErrorKind::CorruptImage, "missing PNM header terminator");
    ++pos_;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  unsigned sample(bool wide) {
    if (!wide) return static_cast<unsigned char>(bytes_[pos_++]);
    unsigned hi = static_cast<unsigned char>(bytes_[pos_++]);
    unsigned lo = static_cast<unsigned char>(bytes_[pos_++]);
    return (hi << 8) | lo;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

#ifdef ARBC_HAVE_PNG
Raster decode_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error(ErrorKind::CorruptImage, path.string() + ": " + image.message);
  const bool wide = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  // libpng's simplified API converts to linear 16-bit gray with its own
  // coefficients; decode to RGB and apply the fixed luminance weights instead.
  image.format = wide ? PNG_FORMAT_LINEAR_RGB : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorKind::CorruptImage, path.string() + ": " + image.message);
  }
  Raster out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.max_value = wide ? 65535 : 255;
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    if (wide) {
      const auto* p = reinterpret_cast<const std::uint16_t*>(buffer.data()) + 3 * i;
      out.pixels[i] = luminance(p[0], p[1], p[2]);
    } else {
      const std::uint8_t* p = buffer.data() + 3 * i;
      out.pixels[i] = luminance(p[0], p[1], p[2]);
    }
  }
  return out;
}
#endif

}  // namespace

Raster decode_pnm(const std::string& bytes) {
  PnmReader reader(bytes);
  const std::string magic = reader.magic();
  if (magic != "P5" && magic != "P6" && magic != "P2")
    throw Error(ErrorKind::UnsupportedFormat, "unsupported PNM variant " + magic);

  Raster out;
  out.width = static_cast<int>(reader.header_int());
  out.height = static_cast<int>(reader.header_int());
  const long maxval = reader.header_int();
  if (out.width <= 0 || out.height <= 0 || maxval <= 0 || maxval > 65535)
    throw Error(ErrorKind::CorruptImage, "invalid PNM dimensions or maxval");
  out.max_value = maxval > 255 ? 65535 : 255;
  const std::size_t count = static_cast<std::size_t>(out.width) * out.height;
  out.pixels.resize(count);

  // rescale non-canonical maxvals (e.g. 1023) onto 255/65535
  auto rescale = [&](double v) -> std::uint16_t {
    if (v > maxval) throw Error(ErrorKind::CorruptImage, "sample exceeds maxval");
    if (maxval == out.max_value) return static_cast<std::uint16_t>(v);
    return static_cast<std::uint16_t>(std::lround(v * out.max_value / maxval));
  };

  if (magic == "P2") {
    std::istringstream in(bytes);
    std::string tok;
    int fields = 0;
    // re-tokenize, skipping the header (4 tokens) and comments
    std::vector<long> values;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::getline(in, tok);
        continue;
      }
      if (fields++ < 4) continue;
      try {
        values.push_back(std::stol(tok));
      } catch (const std::exception&) {
        throw Error(ErrorKind::CorruptImage, "bad P2 sample '" + tok + "'");
      }
    }
    if (values.size() < count) throw Error(ErrorKind::CorruptImage, "truncated P2 data");
    for (std::size_t i = 0; i < count; ++i) out.pixels[i] = rescale(static_cast<double>(values[i]));
    return out;
  }

  reader.end_header();
  const bool wide = maxval > 255;
  const std::size_t channels = magic == "P6" ? 3 : 1;
  if (reader.remaining() < count * channels * (wide ? 2 : 1))
    throw Error(ErrorKind::CorruptImage, "truncated PNM data");
  for (std::size_t i = 0; i < count; ++i) {
    if (channels == 1) {
      out.pixels[i] = rescale(reader.sample(wide));
    } else {
      const double r = reader.sample(wide), g = reader.sample(wide), b = reader.sample(wide);
      out.pixels[i] = rescale(luminance(r, g, b));
    }
  }
  return out;
}

Raster load_grayscale(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::FileNotFound, path.string());
  const std::string bytes = read_file(path);
  if (bytes.size() >= 8 && static_cast<unsigned char>(bytes[0]) == 0x89 && bytes.compare(1, 3, "PNG") == 0) {
#ifdef ARBC_HAVE_PNG
    return decode_png(path);
#else
    throw Error(ErrorKind::UnsupportedFormat, path.string() + ": built without PNG support");
#endif
  }
  if (bytes.size() < 2 || bytes[0] != 'P') throw Error(ErrorKind::UnsupportedFormat, path.string());
  try {
    return decode_pnm(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_pgm(const Raster& raster, const fs::path& path) {
  std::string out = "P5\n" + std::to_string(raster.width) + " " + std::to_string(raster.height) + "\n" +
                    std::to_string(raster.max_value) + "\n";
  const bool wide = raster.max_value > 255;
  for (std::uint16_t v : raster.pixels) {
    if (wide) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  write_file_atomic(path, out);
}

NormalizedImage normalize_image(const Raster& raster, int target_side) {
  if (target_side < 2 || !is_power_of_two(target_side))
    throw Error(ErrorKind::InvalidSide, "side must be a power of two >= 2, got " + std::to_string(target_side));
  if (raster.width <= 0 || raster.height <= 0 || raster.pixels.empty())
    throw Error(ErrorKind::InvalidArgument, "empty raster");

  const double sx = static_cast<double>(raster.width) / target_side;
  const double sy = static_cast<double>(raster.height) / target_side;
  const double scale = 1.0 / raster.max_value;

  NormalizedImage out;
  out.pixels.resize(target_side, target_side);
  for (int r = 0; r < target_side; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, raster.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, raster.height - 1);
    const double ty = fy - y0;
    for (int c = 0; c < target_side; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, raster.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, raster.width - 1);
      const double tx = fx - x0;
      // lerp form keeps constant regions exact
      const double top = raster.at(y0, x0) + tx * (raster.at(y0, x1) - raster.at(y0, x0));
      const double bottom = raster.at(y1, x0) + tx * (raster.at(y1, x1) - raster.at(y1, x0));
      const double v = top + ty * (bottom - top);
      out.pixels(r, c) = std::clamp(v * scale, 0.0, 1.0);
    }
  }
  return out;
}

Raster to_raster(const NormalizedImage& image) {
  Raster out;
  out.width = out.height = image.side();
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  for (int r = 0; r < out.height; ++r)
    for (int c = 0; c < out.width; ++c)
      out.pixels[static_cast<std::size_t>(r) * out.width + c] =
          static_cast<std::uint16_t>(std::lround(std::clamp(image.pixels(r, c), 0.0, 1.0) * 255.0));
  return out;
}

fs::path DatasetManifest::resolve(const ManifestEntry& entry) const {
  fs::path p(entry.image_path);
  return p.is_absolute() ? p : base_dir / p;
}

DatasetManifest parse_manifest(const std::string& text, const fs::path& base_dir) {
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty())
      throw Error(ErrorKind::FormatError, "manifest line " + std::to_string(line_no) + ": expected id<TAB>path[<TAB>code]");
    if (!seen.insert(fields[0]).second)
      throw Error(ErrorKind::FormatError, "manifest line " + std::to_string(line_no) + ": duplicate image id " + fields[0]);
    ManifestEntry entry{fields[0], fields[1], std::nullopt};
    if (fields.size() == 3 && !fields[2].empty()) entry.irma_code = fields[2];
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::FileNotFound, path.string());
  return parse_manifest(read_file(path), path.parent_path());
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += e.image_id + "\t" + e.image_path + "\t" + e.irma_code.value_or("") + "\n";
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  write_file_atomic(path, format_manifest(manifest));
}

}  // namespace arbc
