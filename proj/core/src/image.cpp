#include "swcnn/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swcnn/error.hpp"

namespace swcnn {

namespace {

void check_dims(int height, int width, int channels) {
  if (height <= 0 || width <= 0) {
    throw Error("image dimensions must be positive, got " + std::to_string(height) + "x" +
                std::to_string(width));
  }
  if (channels != 1 && channels != 3 && channels != 4) {
    throw Error("image channel count must be 1, 3 or 4, got " + std::to_string(channels));
  }
}

}  // namespace

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width, channels);
  if (!(fill >= 0.0f && fill <= 1.0f)) throw Error("image fill value outside [0,1]");
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image::Image(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_dims(height, width, channels);
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw Error("image data length " + std::to_string(data_.size()) + " does not match " +
                std::to_string(height) + "x" + std::to_string(width) + "x" +
                std::to_string(channels));
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw Error("image value outside [0,1]: " + std::to_string(v));
  }
}

Image Image::crop(int top, int left, int h, int w) const {
  if (top < 0 || left < 0 || h <= 0 || w <= 0 || top + h > height_ || left + w > width_) {
    throw Error("crop rectangle outside image");
  }
  Image out(h, w, channels_);
  const std::size_t row_len = static_cast<std::size_t>(w) * channels_;
  for (int y = 0; y < h; ++y) {
    const float* src = &data_[(static_cast<std::size_t>(top + y) * width_ + left) * channels_];
    std::copy_n(src, row_len, &out.at(y, 0, 0));
  }
  return out;
}

void clamp_unit(std::span<float> values) noexcept {
  for (float& v : values) v = v > 0.0f ? (v < 1.0f ? v : 1.0f) : 0.0f;
}

Image to_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  Image out(img.height(), img.width(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = img.channels() == 1 ? img.at(y, x, 0) : img.at(y, x, c);
      }
    }
  }
  return out;
}

Image to_luma(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.height(), img.width(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double v = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
      out.at(y, x, 0) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace swcnn
