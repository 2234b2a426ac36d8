#include "arbc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "arbc/error.hpp"

namespace arbc {

namespace {

enum class Shape { Rectangle, Ellipse };

struct Prototype {
  Shape shape;
  double cx, cy;        // fraction of the raster side
  double width, height; // fraction of the raster side (full extents)
  double angle;         // degrees, counter-clockwise
};

// Sibling pairs (0,1), (2,3), ... share the coarse code axes.
constexpr Prototype kPrototypes[] = {
    {Shape::Rectangle, 0.32, 0.32, 0.30, 0.16, 0.0},
    {Shape::Rectangle, 0.68, 0.32, 0.30, 0.16, 45.0},
    {Shape::Ellipse, 0.50, 0.50, 0.62, 0.24, 0.0},
    {Shape::Ellipse, 0.50, 0.50, 0.62, 0.24, 90.0},
    {Shape::Rectangle, 0.50, 0.50, 0.80, 0.08, 30.0},
    {Shape::Rectangle, 0.50, 0.50, 0.80, 0.08, 120.0},
    {Shape::Rectangle, 0.50, 0.64, 0.56, 0.22, 15.0},
    {Shape::Ellipse, 0.62, 0.38, 0.44, 0.18, 60.0},
};
constexpr int kNumPrototypes = static_cast<int>(std::size(kPrototypes));

}  // namespace

std::string synthetic_code(int label) {
  const int group = (label / 4) % 10;
  const int pair = (label / 2) % 10;
  const int leaf = label % 2;
  std::string t = group == 0 ? "1121" : "1123";
  std::string d = "1" + std::to_string(2 + (pair % 2)) + "0";
  std::string a = "9" + std::to_string(1 + pair) + std::to_string(leaf);
  return t + "-" + d + "-" + a + "-700";
}

std::vector<SyntheticImage> generate_synthetic(const SyntheticConfig& config) {
  if (config.num_classes < 1 || config.num_classes > kNumPrototypes)
    throw Error(ErrorKind::InvalidConfig, "synthetic classes must be 1.." + std::to_string(kNumPrototypes));
  if (config.images_per_class < 1 || config.raster_side < 2)
    throw Error(ErrorKind::InvalidConfig, "synthetic dataset needs images and a raster side >= 2");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const int n = config.num_classes * config.images_per_class;
  const int side = config.raster_side;

  std::vector<SyntheticImage> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int label = i % config.num_classes;
    const Prototype& p = kPrototypes[label];
    const double cx = p.cx * side + config.position_jitter * uniform(rng);
    const double cy = p.cy * side + config.position_jitter * uniform(rng);
    const double scale = 1.0 + config.scale_jitter * uniform(rng);
    const double half_w = 0.5 * p.width * side * scale, half_h = 0.5 * p.height * side * scale;
    const double angle = (p.angle + config.angle_jitter * uniform(rng)) * std::numbers::pi / 180.0;
    const double background = 40.0 + 15.0 * uniform(rng);
    const double foreground = 200.0 + 30.0 * uniform(rng);
    const double cs = std::cos(angle), sn = std::sin(angle);

    SyntheticImage img;
    img.image_id = "syn" + std::string(i < 10 ? "000" : i < 100 ? "00" : i < 1000 ? "0" : "") + std::to_string(i);
    img.label = label;
    img.irma_code = synthetic_code(label);
    img.raster.width = img.raster.height = side;
    img.raster.pixels.resize(static_cast<std::size_t>(side) * side);
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        const double dx = c + 0.5 - cx, dy = cy - (r + 0.5);
        const double u = dx * cs + dy * sn, v = -dx * sn + dy * cs;
        bool inside = false;
        if (p.shape == Shape::Rectangle)
          inside = std::abs(u) <= half_w && std::abs(v) <= half_h;
        else
          inside = (u * u) / (half_w * half_w) + (v * v) / (half_h * half_h) <= 1.0;
        const double value = (inside ? foreground : background) + config.noise_sigma * normal(rng);
        img.raster.pixels[static_cast<std::size_t>(r) * side + c] =
            static_cast<std::uint16_t>(std::lround(std::clamp(value, 0.0, 255.0)));
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

void write_synthetic(const std::vector<SyntheticImage>& images, std::size_t train_count,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  DatasetManifest train, test;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    const std::string rel = "images/" + img.image_id + ".pgm";
    save_pgm(img.raster, dir / rel);
    (i < train_count ? train : test).entries.push_back({img.image_id, rel, img.irma_code});
  }
  save_manifest(train, dir / "train.tsv");
  save_manifest(test, dir / "test.tsv");
}

}  // namespace arbc
