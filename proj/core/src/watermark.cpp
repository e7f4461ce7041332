#include "swcnn/watermark.hpp"

#include <algorithm>
#include <cmath>

#include "swcnn/error.hpp"
#include "swcnn/rng.hpp"

namespace swcnn {

namespace {

struct Box {
  int height;
  int width;
};

Box scaled_box(const WatermarkAsset& asset, double scale) {
  return {scaled_extent(asset.height(), scale), scaled_extent(asset.width(), scale)};
}

void check_inside(const PlacementSpec& spec, Box box, int height, int width) {
  if (spec.row < 0 || spec.col < 0 || spec.row + box.height > height ||
      spec.col + box.width > width) {
    throw Error("placement of watermark '" + spec.watermark_id + "' (" +
                std::to_string(box.height) + "x" + std::to_string(box.width) + " at " +
                std::to_string(spec.row) + "," + std::to_string(spec.col) +
                ") falls outside the " + std::to_string(height) + "x" + std::to_string(width) +
                " image");
  }
}

std::size_t covered_pixels(const WatermarkAsset& scaled, double transparency) {
  const float t = static_cast<float>(transparency);
  return static_cast<std::size_t>(std::count_if(
      scaled.alpha.begin(), scaled.alpha.end(), [t](float m) { return t * m > 0.0f; }));
}

}  // namespace

WatermarkAsset make_asset(std::string id, const Image& rgba) {
  WatermarkAsset asset;
  asset.id = std::move(id);
  asset.color = to_rgb(rgba);
  asset.alpha.assign(static_cast<std::size_t>(rgba.height()) * rgba.width(), 1.0f);
  if (rgba.channels() == 4) {
    for (int y = 0; y < rgba.height(); ++y) {
      for (int x = 0; x < rgba.width(); ++x) {
        asset.alpha[static_cast<std::size_t>(y) * rgba.width() + x] = rgba.at(y, x, 3);
      }
    }
  }
  return asset;
}

WatermarkAsset load_watermark(const std::filesystem::path& path) {
  return make_asset(path.stem().string(), load_image(path));
}

std::vector<WatermarkAsset> load_watermark_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  if (ec) throw Error("cannot read watermark directory '" + dir.string() + "': " + ec.message());
  if (files.empty()) throw Error("no watermark PNG files in '" + dir.string() + "'");
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.stem().string() < b.stem().string(); });
  std::vector<WatermarkAsset> assets;
  assets.reserve(files.size());
  for (const auto& f : files) assets.push_back(load_watermark(f));
  return assets;
}

SamplerConfig SamplerConfig::training() { return {}; }

SamplerConfig SamplerConfig::test(double transparency) {
  SamplerConfig cfg;
  cfg.transparencies = {transparency};
  cfg.scale_min = 1.5;
  cfg.scale_max = 1.5;
  return cfg;
}

int scaled_extent(int native, double scale) {
  return std::max(1, static_cast<int>(std::lround(native * scale)));
}

WatermarkAsset rescale(const WatermarkAsset& asset, double scale) {
  if (!(scale > 0.0)) throw Error("watermark scale must be positive");
  const Box box = scaled_box(asset, scale);
  if (box.height == asset.height() && box.width == asset.width()) return asset;
  WatermarkAsset out;
  out.id = asset.id;
  out.color = Image(box.height, box.width, 3);
  out.alpha.assign(static_cast<std::size_t>(box.height) * box.width, 0.0f);
  const double ry = static_cast<double>(asset.height()) / box.height;
  const double rx = static_cast<double>(asset.width()) / box.width;
  for (int y = 0; y < box.height; ++y) {
    const double sy = std::clamp((y + 0.5) * ry - 0.5, 0.0, asset.height() - 1.0);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, asset.height() - 1);
    const double fy = sy - y0;
    for (int x = 0; x < box.width; ++x) {
      const double sx = std::clamp((x + 0.5) * rx - 0.5, 0.0, asset.width() - 1.0);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, asset.width() - 1);
      const double fx = sx - x0;
      const double w00 = (1 - fy) * (1 - fx), w01 = (1 - fy) * fx, w10 = fy * (1 - fx),
                   w11 = fy * fx;
      for (int c = 0; c < 3; ++c) {
        const double v = w00 * asset.color.at(y0, x0, c) + w01 * asset.color.at(y0, x1, c) +
                         w10 * asset.color.at(y1, x0, c) + w11 * asset.color.at(y1, x1, c);
        out.color.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
      const double a = w00 * asset.alpha_at(y0, x0) + w01 * asset.alpha_at(y0, x1) +
                       w10 * asset.alpha_at(y1, x0) + w11 * asset.alpha_at(y1, x1);
      out.alpha[static_cast<std::size_t>(y) * box.width + x] =
          static_cast<float>(std::clamp(a, 0.0, 1.0));
    }
  }
  return out;
}

std::vector<float> effective_alpha(const WatermarkAsset& asset, const PlacementSpec& spec,
                                   int height, int width) {
  const WatermarkAsset scaled = rescale(asset, spec.scale);
  check_inside(spec, {scaled.height(), scaled.width()}, height, width);
  std::vector<float> field(static_cast<std::size_t>(height) * width, 0.0f);
  const float t = static_cast<float>(spec.transparency);
  for (int y = 0; y < scaled.height(); ++y) {
    for (int x = 0; x < scaled.width(); ++x) {
      field[static_cast<std::size_t>(spec.row + y) * width + spec.col + x] =
          t * scaled.alpha_at(y, x);
    }
  }
  return field;
}

Image blend(const Image& clean, const WatermarkAsset& asset, const PlacementSpec& spec) {
  if (clean.channels() != 3) {
    throw Error("blend expects a 3-channel image, got " + std::to_string(clean.channels()));
  }
  if (asset.color.channels() != 3) throw Error("watermark '" + asset.id + "' is not RGB");
  if (spec.transparency < 0.0 || spec.transparency > 1.0) {
    throw Error("transparency must lie in [0,1]");
  }
  const WatermarkAsset scaled = rescale(asset, spec.scale);
  check_inside(spec, {scaled.height(), scaled.width()}, clean.height(), clean.width());
  Image out = clean;
  const float t = static_cast<float>(spec.transparency);
  for (int y = 0; y < scaled.height(); ++y) {
    for (int x = 0; x < scaled.width(); ++x) {
      const double a = t * scaled.alpha_at(y, x);
      for (int c = 0; c < 3; ++c) {
        const double w = scaled.color.at(y, x, c);
        const double v = clean.at(spec.row + y, spec.col + x, c);
        const double mixed = a * w + (1.0 - a) * v;
        out.at(spec.row + y, spec.col + x, c) =
            static_cast<float>(std::clamp(mixed, std::min(w, v), std::max(w, v)));
      }
    }
  }
  return out;
}

CoverageStats coverage(const WatermarkAsset& asset, const PlacementSpec& spec, int height,
                       int width) {
  const auto field = effective_alpha(asset, spec, height, width);
  const auto covered = std::count_if(field.begin(), field.end(), [](float a) { return a > 0.0f; });
  return {static_cast<double>(covered) / static_cast<double>(field.size())};
}

PlacementSpec sample_placement(std::uint64_t seed, int height, int width,
                               const WatermarkAsset& asset, const SamplerConfig& cfg) {
  if (cfg.transparencies.empty()) throw Error("sampler has no transparency levels");
  if (cfg.scale_min <= 0.0 || cfg.scale_max < cfg.scale_min) throw Error("invalid scale range");
  Rng rng(seed);
  const double total = static_cast<double>(height) * width;
  for (int attempt = 0; attempt < cfg.retry_budget; ++attempt) {
    PlacementSpec spec;
    spec.watermark_id = asset.id;
    spec.seed = seed;
    spec.transparency = cfg.transparencies[rng.below(cfg.transparencies.size())];
    spec.scale = cfg.scale_min == cfg.scale_max ? cfg.scale_min
                                                : rng.uniform(cfg.scale_min, cfg.scale_max);
    const Box box = scaled_box(asset, spec.scale);
    if (box.height > height || box.width > width) continue;
    spec.row = static_cast<int>(rng.between(0, height - box.height));
    spec.col = static_cast<int>(rng.between(0, width - box.width));
    const WatermarkAsset scaled = rescale(asset, spec.scale);
    if (static_cast<double>(covered_pixels(scaled, spec.transparency)) / total <=
        cfg.max_coverage) {
      return spec;
    }
  }
  throw Error("no valid placement for watermark '" + asset.id + "' on a " +
              std::to_string(height) + "x" + std::to_string(width) + " image after " +
              std::to_string(cfg.retry_budget) + " attempts");
}

}  // namespace swcnn
