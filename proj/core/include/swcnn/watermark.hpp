#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "swcnn/image.hpp"

namespace swcnn {

// A watermark: RGB color content plus a per-pixel opacity mask of the same size.
struct WatermarkAsset {
  std::string id;
  Image color;               // 3 channels
  std::vector<float> alpha;  // height x width, values in [0,1]

  int height() const noexcept { return color.height(); }
  int width() const noexcept { return color.width(); }
  float alpha_at(int y, int x) const noexcept {
    return alpha[static_cast<std::size_t>(y) * color.width() + x];
  }
};

// Builds an asset from an RGBA image (alpha channel = mask). RGB input gets a
// fully opaque mask.
WatermarkAsset make_asset(std::string id, const Image& rgba);

// Loads one RGBA PNG; the file stem becomes the id.
WatermarkAsset load_watermark(const std::filesystem::path& path);

// Loads every *.png in `dir`, sorted by id. Throws if none are found.
std::vector<WatermarkAsset> load_watermark_dir(const std::filesystem::path& dir);

struct PlacementSpec {
  int row = 0;  // top-left of the scaled watermark box
  int col = 0;
  double scale = 1.0;
  double transparency = 1.0;
  std::string watermark_id;
  std::uint64_t seed = 0;

  friend bool operator==(const PlacementSpec&, const PlacementSpec&) = default;
};

struct SamplerConfig {
  std::vector<double> transparencies{0.3, 0.5, 0.7, 1.0};
  double scale_min = 0.5;
  double scale_max = 1.0;
  double max_coverage = 0.4;
  int retry_budget = 64;

  static SamplerConfig training();
  static SamplerConfig test(double transparency);
};

// Scaled box size for an asset: round(native * scale), at least 1 pixel.
int scaled_extent(int native, double scale);

// Bilinear (pixel-center aligned) rescale of color and mask.
WatermarkAsset rescale(const WatermarkAsset& asset, double scale);

// Effective opacity field over the target image: transparency times the
// rescaled mask inside the placed box, exactly zero elsewhere. Row-major H x W.
std::vector<float> effective_alpha(const WatermarkAsset& asset, const PlacementSpec& spec,
                                   int height, int width);

// out = a * W + (1 - a) * clean, per pixel and channel. Pixels outside the
// placed box are copied unchanged.
Image blend(const Image& clean, const WatermarkAsset& asset, const PlacementSpec& spec);

struct CoverageStats {
  double covered_fraction = 0.0;
};

CoverageStats coverage(const WatermarkAsset& asset, const PlacementSpec& spec, int height,
                       int width);

// Deterministic in (seed, dims, asset, cfg). Rejection-samples until the
// coverage bound holds; throws after cfg.retry_budget failed attempts.
PlacementSpec sample_placement(std::uint64_t seed, int height, int width,
                               const WatermarkAsset& asset, const SamplerConfig& cfg);

}  // namespace swcnn
