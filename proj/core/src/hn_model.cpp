#include "swcnn/hn_model.hpp"

#include <cmath>
#include <cstdio>

#include "swcnn/error.hpp"
#include "swcnn/nn_ops.hpp"
#include "swcnn/rng.hpp"

namespace swcnn {

namespace {

constexpr const char* kSlopeTensor = "hn.leaky_slope";

std::string param_name(int layer, const char* part) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "hn.l%02d.%s", layer, part);
  return buf;
}

NamedTensor uniform_tensor(std::string name, std::vector<std::uint32_t> dims, double bound,
                           std::uint64_t seed) {
  NamedTensor t{std::move(name), std::move(dims), {}};
  t.values.resize(t.numel());
  Rng rng(seed);
  for (auto& v : t.values) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

NamedTensor zero_tensor(std::string name, std::vector<std::uint32_t> dims) {
  NamedTensor t{std::move(name), std::move(dims), {}};
  t.values.assign(t.numel(), 0.0f);
  return t;
}

bool pools(LayerKind k) { return k == LayerKind::kConvReluMaxPool; }
bool upsamples(LayerKind k) { return k == LayerKind::kConvReluTranspose; }

void accumulate(Tensor& slot, const Tensor& g) {
  if (slot.size() == 0) {
    slot = g;
  } else {
    nn::add_inplace(slot, g);
  }
}

int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

std::string_view kind_name(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::kConvRelu: return "CR";
    case LayerKind::kConvReluMaxPool: return "CRMP";
    case LayerKind::kConvReluTranspose: return "CRTC";
    case LayerKind::kConvLeakyRelu: return "CLR";
  }
  return "?";
}

std::vector<LayerSpec> hn_layer_table(int width_divisor) {
  if (width_divisor < 1 || 48 % width_divisor != 0 || 32 % width_divisor != 0) {
    throw Error("width divisor must divide 32 and 48, got " + std::to_string(width_divisor));
  }
  const int e = 48 / width_divisor;  // encoder width
  const int d = 96 / width_divisor;  // decoder width
  const int h1 = 64 / width_divisor;
  const int h2 = 32 / width_divisor;
  using K = LayerKind;
  return {
      {1, K::kConvRelu, 3, e, 3, std::nullopt},
      {2, K::kConvReluMaxPool, e, e, 3, std::nullopt},
      {3, K::kConvReluMaxPool, e, e, 3, std::nullopt},
      {4, K::kConvReluMaxPool, e, e, 3, std::nullopt},
      {5, K::kConvReluMaxPool, e, e, 3, std::nullopt},
      {6, K::kConvReluMaxPool, e, e, 3, std::nullopt},
      {7, K::kConvReluTranspose, e, e, 3, std::nullopt},
      {8, K::kConvRelu, 2 * e, d, 3, 5},
      {9, K::kConvReluTranspose, d, d, 3, std::nullopt},
      {10, K::kConvRelu, e + d, d, 3, 4},
      {11, K::kConvReluTranspose, d, d, 3, std::nullopt},
      {12, K::kConvRelu, e + d, d, 3, 3},
      {13, K::kConvReluTranspose, d, d, 3, std::nullopt},
      {14, K::kConvRelu, e + d, d, 3, 2},
      {15, K::kConvReluTranspose, d, d, 3, std::nullopt},
      {16, K::kConvRelu, 3 + d, h1, 3, 0},
      {17, K::kConvRelu, h1, h2, 3, std::nullopt},
      {18, K::kConvLeakyRelu, h2, 3, 3, std::nullopt},
  };
}

std::size_t layer_param_count(const LayerSpec& l) {
  const std::size_t k2 = static_cast<std::size_t>(l.kernel) * l.kernel;
  std::size_t n = static_cast<std::size_t>(l.in_channels) * l.out_channels * k2 + l.out_channels;
  if (upsamples(l.kind)) n += static_cast<std::size_t>(l.out_channels) * l.out_channels * 4 + l.out_channels;
  return n;
}

HNModel HNModel::build(std::uint64_t seed, float leaky_slope, int width_divisor) {
  HNModel m;
  m.layers_ = hn_layer_table(width_divisor);
  m.leaky_slope_ = leaky_slope;
  m.width_divisor_ = width_divisor;
  for (const auto& l : m.layers_) {
    LayerParams lp;
    const auto ci = static_cast<std::uint32_t>(l.in_channels);
    const auto co = static_cast<std::uint32_t>(l.out_channels);
    // He-uniform on fan-in; the transpose conv is linear, so it gets half the variance.
    const double conv_bound = std::sqrt(6.0 / (9.0 * l.in_channels));
    lp.conv_kernel = static_cast<int>(m.params_.size());
    m.params_.push_back(uniform_tensor(param_name(l.index, "conv.kernel"), {co, ci, 3, 3},
                                       conv_bound, derive_seed(seed, 4ULL * l.index)));
    lp.conv_bias = static_cast<int>(m.params_.size());
    m.params_.push_back(zero_tensor(param_name(l.index, "conv.bias"), {co}));
    if (upsamples(l.kind)) {
      const double up_bound = std::sqrt(3.0 / l.out_channels);
      lp.up_kernel = static_cast<int>(m.params_.size());
      m.params_.push_back(uniform_tensor(param_name(l.index, "up.kernel"), {co, co, 2, 2},
                                         up_bound, derive_seed(seed, 4ULL * l.index + 1)));
      lp.up_bias = static_cast<int>(m.params_.size());
      m.params_.push_back(zero_tensor(param_name(l.index, "up.bias"), {co}));
    }
    m.layer_params_.push_back(lp);
  }
  return m;
}

std::vector<TensorShape> HNModel::checkpoint_shapes() const {
  std::vector<TensorShape> shapes;
  for (const auto& p : params_) shapes.push_back({p.name, p.dims});
  shapes.push_back({kSlopeTensor, {1}});
  return shapes;
}

void HNModel::save(const std::filesystem::path& path) const {
  std::vector<NamedTensor> all = params_;
  all.push_back({kSlopeTensor, {1}, {leaky_slope_}});
  write_checkpoint(path, all);
}

HNModel HNModel::load(const std::filesystem::path& path, int width_divisor) {
  HNModel m = build(0, 0.1f, width_divisor);
  const auto expected = m.checkpoint_shapes();
  auto tensors = read_checkpoint(path, &expected);
  m.leaky_slope_ = tensors.back().values.at(0);
  tensors.pop_back();
  m.params_ = std::move(tensors);
  return m;
}

std::size_t HNModel::param_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.values.size();
  return n;
}

ParamGrads HNModel::zero_grads() const {
  ParamGrads g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.values.size(), 0.0f);
  return g;
}

Tensor HNModel::forward(const Tensor& x) const {
  HNTape tape;
  return forward(x, tape);
}

Tensor HNModel::forward(const Tensor& x, HNTape& tape) const {
  if (x.c != 3) throw Error("HN expects a 3-channel input, got " + std::to_string(x.c));
  if (x.h % kHnStride != 0 || x.w % kHnStride != 0 || x.h == 0 || x.w == 0) {
    throw Error("HN input " + std::to_string(x.h) + "x" + std::to_string(x.w) +
                " is not a multiple of 32; use restore() for arbitrary sizes");
  }
  tape.outputs[0] = x;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const LayerSpec& l = layers_[li];
    const LayerParams& lp = layer_params_[li];
    const int i = l.index;
    const Tensor* in = &tape.outputs[i - 1];
    if (l.concat_source) {
      tape.concat_inputs[i] = nn::concat_channels(tape.outputs[*l.concat_source], tape.outputs[i - 1]);
      in = &tape.concat_inputs[i];
    }
    Tensor& act = tape.activations[i];
    nn::conv3x3_forward(*in, params_[lp.conv_kernel].values, params_[lp.conv_bias].values,
                        l.out_channels, act);
    if (l.kind == LayerKind::kConvLeakyRelu) {
      nn::leaky_relu_inplace(act, leaky_slope_);
    } else {
      nn::relu_inplace(act);
    }
    if (pools(l.kind)) {
      nn::maxpool2x2_forward(act, tape.outputs[i], tape.pool_argmax[i]);
    } else if (upsamples(l.kind)) {
      nn::conv_transpose2x2_forward(act, params_[lp.up_kernel].values, params_[lp.up_bias].values,
                                    l.out_channels, tape.outputs[i]);
    } else {
      tape.outputs[i] = act;
    }
  }
  return tape.outputs[kHnLayers];
}

void HNModel::backward(const HNTape& tape, const Tensor& grad_output, ParamGrads& grads,
                       Tensor* grad_input) const {
  if (!grad_output.same_shape(tape.outputs[kHnLayers])) {
    throw Error("HN backward: gradient shape does not match the network output");
  }
  std::array<Tensor, kHnLayers + 1> grad_out;
  grad_out[kHnLayers] = grad_output;
  for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
    const LayerSpec& l = layers_[li];
    const LayerParams& lp = layer_params_[li];
    const int i = l.index;
    Tensor grad_act;
    if (pools(l.kind)) {
      nn::maxpool2x2_backward(grad_out[i], tape.pool_argmax[i], grad_act);
    } else if (upsamples(l.kind)) {
      nn::conv_transpose2x2_backward(tape.activations[i], grad_out[i], params_[lp.up_kernel].values,
                                     grads[lp.up_kernel], grads[lp.up_bias], &grad_act);
    } else {
      grad_act = std::move(grad_out[i]);
    }
    if (l.kind == LayerKind::kConvLeakyRelu) {
      nn::leaky_relu_backward_inplace(tape.activations[i], grad_act, leaky_slope_);
    } else {
      nn::relu_backward_inplace(tape.activations[i], grad_act);
    }
    const Tensor& in = l.concat_source ? tape.concat_inputs[i] : tape.outputs[i - 1];
    const bool need_input_grad = i > 1 || grad_input != nullptr;
    Tensor grad_in;
    nn::conv3x3_backward(in, grad_act, params_[lp.conv_kernel].values, grads[lp.conv_kernel],
                         grads[lp.conv_bias], need_input_grad ? &grad_in : nullptr);
    if (!need_input_grad) continue;
    if (l.concat_source) {
      const int src = *l.concat_source;
      Tensor g_skip(tape.outputs[src].c, in.h, in.w);
      Tensor g_prev(tape.outputs[i - 1].c, in.h, in.w);
      nn::split_channels_add(grad_in, g_skip, g_prev);
      accumulate(grad_out[src], g_skip);
      accumulate(grad_out[i - 1], g_prev);
    } else {
      accumulate(grad_out[i - 1], grad_in);
    }
  }
  if (grad_input != nullptr) *grad_input = std::move(grad_out[0]);
}

Tensor reflect_pad(const Tensor& t, int top, int bottom, int left, int right) {
  Tensor out(t.c, t.h + top + bottom, t.w + left + right);
  for (int c = 0; c < t.c; ++c) {
    for (int y = 0; y < out.h; ++y) {
      const int sy = mirror(y - top, t.h);
      for (int x = 0; x < out.w; ++x) out.at(c, y, x) = t.at(c, sy, mirror(x - left, t.w));
    }
  }
  return out;
}

Image HNModel::restore(const Image& img) const {
  const Tensor x = to_tensor(to_rgb(img));
  const int ph = (kHnStride - x.h % kHnStride) % kHnStride;
  const int pw = (kHnStride - x.w % kHnStride) % kHnStride;
  const int top = ph / 2;
  const int left = pw / 2;
  const Tensor padded = (ph || pw) ? reflect_pad(x, top, ph - top, left, pw - left) : x;
  const Tensor y = forward(padded);
  Tensor cropped(y.c, x.h, x.w);
  for (int c = 0; c < y.c; ++c) {
    for (int r = 0; r < x.h; ++r) {
      for (int col = 0; col < x.w; ++col) cropped.at(c, r, col) = y.at(c, r + top, col + left);
    }
  }
  return to_image(cropped, true);
}

ActivationTrace HNModel::trace(const Tensor& x) const {
  HNTape tape;
  forward(x, tape);
  ActivationTrace t;
  for (int i = 0; i <= kHnLayers; ++i) {
    const Tensor& o = tape.outputs[i];
    t.layer_dims[i] = {o.c, o.h, o.w};
  }
  for (int i = 2; i <= 6; ++i) t.pooled[i] = t.layer_dims[i];
  // T5 comes out of layer 7, T4 of layer 9, ..., T1 of layer 15.
  for (int j = 1; j <= 5; ++j) t.transposed[j] = t.layer_dims[17 - 2 * j];
  return t;
}

}  // namespace swcnn
