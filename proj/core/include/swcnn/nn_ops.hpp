#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swcnn/tensor.hpp"

// Forward and backward kernels of the layer primitives used by the
// restoration network and the perceptual extractor. Backward functions
// accumulate into parameter gradients (+=) and overwrite input gradients.
namespace swcnn::nn {

// 3x3 convolution, stride 1, zero padding 1.
// kernel: (out, in, 3, 3) row-major; bias: (out).
void conv3x3_forward(const Tensor& x, std::span<const float> kernel, std::span<const float> bias,
                     int out_channels, Tensor& y);
// Pass an empty dkernel/dbias to skip parameter gradients, nullptr dx to
// skip the input gradient.
void conv3x3_backward(const Tensor& x, const Tensor& dy, std::span<const float> kernel,
                      std::span<float> dkernel, std::span<float> dbias, Tensor* dx);

// 2x2 transposed convolution, stride 2 (doubles H and W).
// kernel: (in, out, 2, 2) row-major; bias: (out).
void conv_transpose2x2_forward(const Tensor& x, std::span<const float> kernel,
                               std::span<const float> bias, int out_channels, Tensor& y);
void conv_transpose2x2_backward(const Tensor& x, const Tensor& dy, std::span<const float> kernel,
                                std::span<float> dkernel, std::span<float> dbias, Tensor* dx);

// 2x2 max pool, stride 2; H and W must be even. argmax holds the winning
// position (0..3, row-major within the window) per output element.
void maxpool2x2_forward(const Tensor& x, Tensor& y, std::vector<std::uint8_t>& argmax);
void maxpool2x2_backward(const Tensor& dy, const std::vector<std::uint8_t>& argmax, Tensor& dx);

void relu_inplace(Tensor& t) noexcept;
// dy *= (y > 0), with y the activation output.
void relu_backward_inplace(const Tensor& y, Tensor& dy) noexcept;

void leaky_relu_inplace(Tensor& t, float slope) noexcept;
void leaky_relu_backward_inplace(const Tensor& y, Tensor& dy, float slope) noexcept;

Tensor concat_channels(const Tensor& a, const Tensor& b);
// Splits a gradient of concat_channels(a, b) back into parts of a.c and
// b.c channels and adds them into da and db.
void split_channels_add(const Tensor& d, Tensor& da, Tensor& db);

void add_inplace(Tensor& acc, const Tensor& t);

}  // namespace swcnn::nn
