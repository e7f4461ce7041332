#include "swcnn/nn_ops.hpp"

#include <algorithm>
#include <cstring>

#include <Eigen/Core>

#include "swcnn/error.hpp"

namespace swcnn {

Tensor to_tensor(const Image& img) {
  Tensor t(img.channels(), img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) t.at(c, y, x) = img.at(y, x, c);
    }
  }
  return t;
}

Image to_image(const Tensor& t, bool clamp) {
  std::vector<float> data(t.size());
  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      for (int c = 0; c < t.c; ++c) {
        float v = t.at(c, y, x);
        if (clamp) v = v > 0.0f ? (v < 1.0f ? v : 1.0f) : 0.0f;
        data[(static_cast<std::size_t>(y) * t.w + x) * t.c + c] = v;
      }
    }
  }
  return Image(t.h, t.w, t.c, std::move(data));
}

namespace nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

// Per-tap weight matrices: taps[k] is (out x in) for tap k = ky*3 + kx.
std::vector<float> pack_conv_taps(std::span<const float> kernel, int out, int in) {
  std::vector<float> taps(kernel.size());
  for (int o = 0; o < out; ++o) {
    for (int i = 0; i < in; ++i) {
      const float* src = &kernel[(static_cast<std::size_t>(o) * in + i) * 9];
      for (int k = 0; k < 9; ++k) taps[(static_cast<std::size_t>(k) * out + o) * in + i] = src[k];
    }
  }
  return taps;
}

// Zero-padded copy, one (H+2)x(W+2) plane per channel plus two floats of
// slack: the shifted row-major views below read up to two elements past the
// final plane.
std::vector<float> pad_planes(const Tensor& x) {
  const int pw = x.w + 2;
  const std::size_t plane = static_cast<std::size_t>(x.h + 2) * pw;
  std::vector<float> padded(plane * x.c + 2, 0.0f);
  for (int c = 0; c < x.c; ++c) {
    for (int y = 0; y < x.h; ++y) {
      std::memcpy(&padded[c * plane + static_cast<std::size_t>(y + 1) * pw + 1],
                  x.plane(c) + static_cast<std::size_t>(y) * x.w, sizeof(float) * x.w);
    }
  }
  return padded;
}

void check_conv_shapes(const Tensor& x, std::size_t kernel_size, std::size_t bias_size,
                       int out_channels) {
  if (kernel_size != static_cast<std::size_t>(out_channels) * x.c * 9 ||
      bias_size != static_cast<std::size_t>(out_channels)) {
    throw Error("conv3x3: parameter shape does not match " + std::to_string(x.c) + "->" +
                std::to_string(out_channels));
  }
}

}  // namespace

// The convolution is evaluated as nine GEMMs, one per kernel tap, over
// shifted views of the padded input. Outputs are computed on a grid of
// width W+2 (two junk columns per row) so every view is a plain strided
// matrix; the junk columns are discarded.
void conv3x3_forward(const Tensor& x, std::span<const float> kernel, std::span<const float> bias,
                     int out_channels, Tensor& y) {
  check_conv_shapes(x, kernel.size(), bias.size(), out_channels);
  const int in = x.c;
  const int pw = x.w + 2;
  const Eigen::Index plane = static_cast<Eigen::Index>(x.h + 2) * pw;
  const Eigen::Index n = static_cast<Eigen::Index>(x.h) * pw;
  const auto padded = pad_planes(x);
  const auto taps = pack_conv_taps(kernel, out_channels, in);

  RowMat out(out_channels, n);
  for (int o = 0; o < out_channels; ++o) out.row(o).setConstant(bias[o]);
  for (int k = 0; k < 9; ++k) {
    const Eigen::Index offset = (k / 3) * pw + (k % 3);
    ConstStridedMap xk(padded.data() + offset, in, n, Eigen::OuterStride<>(plane));
    ConstMatMap wk(taps.data() + static_cast<std::size_t>(k) * out_channels * in, out_channels, in);
    out.noalias() += wk * xk;
  }

  y = Tensor(out_channels, x.h, x.w);
  for (int o = 0; o < out_channels; ++o) {
    for (int r = 0; r < x.h; ++r) {
      std::memcpy(y.plane(o) + static_cast<std::size_t>(r) * x.w, out.data() + o * n + r * pw,
                  sizeof(float) * x.w);
    }
  }
}

void conv3x3_backward(const Tensor& x, const Tensor& dy, std::span<const float> kernel,
                      std::span<float> dkernel, std::span<float> dbias, Tensor* dx) {
  const int in = x.c;
  const int out_channels = dy.c;
  check_conv_shapes(x, kernel.size(), static_cast<std::size_t>(out_channels), out_channels);
  if (dy.h != x.h || dy.w != x.w) throw Error("conv3x3 backward: gradient shape mismatch");
  const int pw = x.w + 2;
  const Eigen::Index plane = static_cast<Eigen::Index>(x.h + 2) * pw;
  const Eigen::Index n = static_cast<Eigen::Index>(x.h) * pw;

  RowMat grad = RowMat::Zero(out_channels, n);
  for (int o = 0; o < out_channels; ++o) {
    for (int r = 0; r < x.h; ++r) {
      std::memcpy(grad.data() + o * n + r * pw, dy.plane(o) + static_cast<std::size_t>(r) * x.w,
                  sizeof(float) * x.w);
    }
  }

  if (!dbias.empty()) {
    for (int o = 0; o < out_channels; ++o) {
      double s = 0.0;
      const float* p = dy.plane(o);
      for (std::size_t i = 0; i < dy.plane_size(); ++i) s += p[i];
      dbias[o] += static_cast<float>(s);
    }
  }

  if (!dkernel.empty()) {
    const auto padded = pad_planes(x);
    RowMat tap_grad(out_channels, in);
    for (int k = 0; k < 9; ++k) {
      const Eigen::Index offset = (k / 3) * pw + (k % 3);
      ConstStridedMap xk(padded.data() + offset, in, n, Eigen::OuterStride<>(plane));
      tap_grad.noalias() = grad * xk.transpose();
      for (int o = 0; o < out_channels; ++o) {
        for (int i = 0; i < in; ++i) {
          dkernel[(static_cast<std::size_t>(o) * in + i) * 9 + k] += tap_grad(o, i);
        }
      }
    }
  }

  if (dx != nullptr) {
    const auto taps = pack_conv_taps(kernel, out_channels, in);
    std::vector<float> dpadded(static_cast<std::size_t>(plane) * in + 2, 0.0f);
    for (int k = 0; k < 9; ++k) {
      const Eigen::Index offset = (k / 3) * pw + (k % 3);
      StridedMap dxk(dpadded.data() + offset, in, n, Eigen::OuterStride<>(plane));
      ConstMatMap wk(taps.data() + static_cast<std::size_t>(k) * out_channels * in, out_channels, in);
      dxk.noalias() += wk.transpose() * grad;
    }
    *dx = Tensor(in, x.h, x.w);
    for (int c = 0; c < in; ++c) {
      for (int r = 0; r < x.h; ++r) {
        std::memcpy(dx->plane(c) + static_cast<std::size_t>(r) * x.w,
                    &dpadded[c * plane + static_cast<std::size_t>(r + 1) * pw + 1],
                    sizeof(float) * x.w);
      }
    }
  }
}

namespace {

// (4*out x in) matrix; row k*out + o holds kernel[i][o][k] for tap k = ky*2 + kx.
RowMat pack_transpose_taps(std::span<const float> kernel, int in, int out) {
  RowMat w(4 * out, in);
  for (int i = 0; i < in; ++i) {
    for (int o = 0; o < out; ++o) {
      for (int k = 0; k < 4; ++k) w(k * out + o, i) = kernel[(static_cast<std::size_t>(i) * out + o) * 4 + k];
    }
  }
  return w;
}

}  // namespace

void conv_transpose2x2_forward(const Tensor& x, std::span<const float> kernel,
                               std::span<const float> bias, int out_channels, Tensor& y) {
  if (kernel.size() != static_cast<std::size_t>(x.c) * out_channels * 4 ||
      bias.size() != static_cast<std::size_t>(out_channels)) {
    throw Error("conv_transpose2x2: parameter shape mismatch");
  }
  const Eigen::Index hw = static_cast<Eigen::Index>(x.plane_size());
  const RowMat w = pack_transpose_taps(kernel, x.c, out_channels);
  ConstMatMap xm(x.data.data(), x.c, hw);
  const RowMat z = w * xm;
  y = Tensor(out_channels, 2 * x.h, 2 * x.w);
  for (int k = 0; k < 4; ++k) {
    const int ky = k / 2;
    const int kx = k % 2;
    for (int o = 0; o < out_channels; ++o) {
      const float* zr = z.data() + (static_cast<Eigen::Index>(k) * out_channels + o) * hw;
      const float b = bias[o];
      for (int r = 0; r < x.h; ++r) {
        float* dst = &y.at(o, 2 * r + ky, kx);
        for (int c = 0; c < x.w; ++c) dst[2 * c] = zr[r * x.w + c] + b;
      }
    }
  }
}

void conv_transpose2x2_backward(const Tensor& x, const Tensor& dy, std::span<const float> kernel,
                                std::span<float> dkernel, std::span<float> dbias, Tensor* dx) {
  const int out_channels = dy.c;
  if (dy.h != 2 * x.h || dy.w != 2 * x.w ||
      kernel.size() != static_cast<std::size_t>(x.c) * out_channels * 4) {
    throw Error("conv_transpose2x2 backward: shape mismatch");
  }
  const Eigen::Index hw = static_cast<Eigen::Index>(x.plane_size());
  RowMat dz(4 * out_channels, hw);
  for (int k = 0; k < 4; ++k) {
    const int ky = k / 2;
    const int kx = k % 2;
    for (int o = 0; o < out_channels; ++o) {
      float* zr = dz.data() + (static_cast<Eigen::Index>(k) * out_channels + o) * hw;
      for (int r = 0; r < x.h; ++r) {
        const float* src = dy.plane(o) + static_cast<std::size_t>(2 * r + ky) * dy.w + kx;
        for (int c = 0; c < x.w; ++c) zr[r * x.w + c] = src[2 * c];
      }
    }
  }
  if (!dbias.empty()) {
    for (int o = 0; o < out_channels; ++o) {
      double s = 0.0;
      const float* p = dy.plane(o);
      for (std::size_t i = 0; i < dy.plane_size(); ++i) s += p[i];
      dbias[o] += static_cast<float>(s);
    }
  }
  ConstMatMap xm(x.data.data(), x.c, hw);
  if (!dkernel.empty()) {
    const RowMat dw = dz * xm.transpose();
    for (int i = 0; i < x.c; ++i) {
      for (int o = 0; o < out_channels; ++o) {
        for (int k = 0; k < 4; ++k) {
          dkernel[(static_cast<std::size_t>(i) * out_channels + o) * 4 + k] += dw(k * out_channels + o, i);
        }
      }
    }
  }
  if (dx != nullptr) {
    const RowMat w = pack_transpose_taps(kernel, x.c, out_channels);
    *dx = Tensor(x.c, x.h, x.w);
    MatMap dxm(dx->data.data(), x.c, hw);
    dxm.noalias() = w.transpose() * dz;
  }
}

void maxpool2x2_forward(const Tensor& x, Tensor& y, std::vector<std::uint8_t>& argmax) {
  if (x.h % 2 != 0 || x.w % 2 != 0) {
    throw Error("maxpool2x2: input " + std::to_string(x.h) + "x" + std::to_string(x.w) +
                " is not even");
  }
  y = Tensor(x.c, x.h / 2, x.w / 2);
  argmax.assign(y.size(), 0);
  std::size_t idx = 0;
  for (int c = 0; c < x.c; ++c) {
    for (int r = 0; r < y.h; ++r) {
      const float* top = x.plane(c) + static_cast<std::size_t>(2 * r) * x.w;
      const float* bottom = top + x.w;
      for (int col = 0; col < y.w; ++col, ++idx) {
        const float v[4] = {top[2 * col], top[2 * col + 1], bottom[2 * col], bottom[2 * col + 1]};
        std::uint8_t best = 0;
        for (std::uint8_t k = 1; k < 4; ++k) {
          if (v[k] > v[best]) best = k;
        }
        y.data[idx] = v[best];
        argmax[idx] = best;
      }
    }
  }
}

void maxpool2x2_backward(const Tensor& dy, const std::vector<std::uint8_t>& argmax, Tensor& dx) {
  dx = Tensor(dy.c, dy.h * 2, dy.w * 2);
  std::size_t idx = 0;
  for (int c = 0; c < dy.c; ++c) {
    for (int r = 0; r < dy.h; ++r) {
      for (int col = 0; col < dy.w; ++col, ++idx) {
        const int k = argmax[idx];
        dx.at(c, 2 * r + k / 2, 2 * col + k % 2) = dy.data[idx];
      }
    }
  }
}

void relu_inplace(Tensor& t) noexcept {
  for (float& v : t.data) v = v > 0.0f ? v : 0.0f;
}

void relu_backward_inplace(const Tensor& y, Tensor& dy) noexcept {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(y.data[i] > 0.0f)) dy.data[i] = 0.0f;
  }
}

void leaky_relu_inplace(Tensor& t, float slope) noexcept {
  for (float& v : t.data) v = v > 0.0f ? v : slope * v;
}

void leaky_relu_backward_inplace(const Tensor& y, Tensor& dy, float slope) noexcept {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(y.data[i] > 0.0f)) dy.data[i] *= slope;
  }
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.h != b.h || a.w != b.w) {
    throw Error("concat: spatial mismatch " + std::to_string(a.h) + "x" + std::to_string(a.w) +
                " vs " + std::to_string(b.h) + "x" + std::to_string(b.w));
  }
  Tensor out(a.c + b.c, a.h, a.w);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

void split_channels_add(const Tensor& d, Tensor& da, Tensor& db) {
  const std::size_t na = da.size();
  for (std::size_t i = 0; i < na; ++i) da.data[i] += d.data[i];
  for (std::size_t i = 0; i < db.size(); ++i) db.data[i] += d.data[na + i];
}

void add_inplace(Tensor& acc, const Tensor& t) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += t.data[i];
}

}  // namespace nn
}  // namespace swcnn
