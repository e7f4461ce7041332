#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace swcnn {

// Interleaved (row-major, channel-last) raster with values in [0, 1].
// Channel count is 1, 3 or 4.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f);
  // Takes ownership of `data`; throws if the length or value range is wrong.
  Image(int height, int width, int channels, std::vector<float> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int y, int x, int c) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int y, int x, int c) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<float> pixels() noexcept { return data_; }
  std::span<const float> pixels() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  // Sub-rectangle copy; the rectangle must lie inside the image.
  Image crop(int top, int left, int h, int w) const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// Clamps every value into [0, 1]; NaN becomes 0.
void clamp_unit(std::span<float> values) noexcept;

// Drops alpha from RGBA and replicates gray; result is always 3 channels.
Image to_rgb(const Image& img);

// ITU-R BT.601 luma as a single-channel image (identity for gray input).
Image to_luma(const Image& img);

// 8-bit PNG or JPEG. Values are scaled by 1/255; channel count is preserved
// (gray+alpha is widened to RGBA, palettes are expanded).
Image load_image(const std::filesystem::path& path);

// Writes an 8-bit PNG with the image's channel count.
void save_image(const Image& img, const std::filesystem::path& path);

// PNG bytes exactly as save_image would write them.
std::vector<unsigned char> encode_png(const Image& img);

}  // namespace swcnn
