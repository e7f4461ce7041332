#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "swcnn/image.hpp"

namespace swcnn {

// Planar (channel, row, column) float tensor for a single sample.
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int channels, int height, int width, float fill = 0.0f)
      : c(channels), h(height), w(width),
        data(static_cast<std::size_t>(channels) * height * width, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(h) * w; }
  float* plane(int ch) noexcept { return data.data() + ch * plane_size(); }
  const float* plane(int ch) const noexcept { return data.data() + ch * plane_size(); }
  float& at(int ch, int y, int x) noexcept { return data[ch * plane_size() + static_cast<std::size_t>(y) * w + x]; }
  float at(int ch, int y, int x) const noexcept { return data[ch * plane_size() + static_cast<std::size_t>(y) * w + x]; }
  bool same_shape(const Tensor& o) const noexcept { return c == o.c && h == o.h && w == o.w; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

Tensor to_tensor(const Image& img);

// Values are clamped into [0,1] when `clamp` is set; otherwise they must
// already be in range.
Image to_image(const Tensor& t, bool clamp = true);

}  // namespace swcnn
