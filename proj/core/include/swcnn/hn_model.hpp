#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "swcnn/checkpoint.hpp"
#include "swcnn/image.hpp"
#include "swcnn/tensor.hpp"

namespace swcnn {

enum class LayerKind {
  kConvRelu,           // CR
  kConvReluMaxPool,    // CRMP
  kConvReluTranspose,  // CRTC
  kConvLeakyRelu,      // CLR
};

std::string_view kind_name(LayerKind kind) noexcept;

struct LayerSpec {
  int index = 0;  // 1..18
  LayerKind kind = LayerKind::kConvRelu;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  // Layer whose output is concatenated in front of the previous layer's
  // output to form this layer's input; 0 means the network input.
  std::optional<int> concat_source;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline constexpr int kHnLayers = 18;
inline constexpr int kHnStride = 32;  // five 2x poolings

// Layer table; width_divisor > 1 shrinks every hidden width (test hook).
std::vector<LayerSpec> hn_layer_table(int width_divisor = 1);

using ParamGrads = std::vector<std::vector<float>>;

// Activations kept for the backward pass. Index i holds layer i (1..18);
// outputs[0] is the network input.
struct HNTape {
  std::array<Tensor, kHnLayers + 1> outputs;      // after pooling / transpose
  std::array<Tensor, kHnLayers + 1> activations;  // conv + activation
  std::array<Tensor, kHnLayers + 1> concat_inputs;
  std::array<std::vector<std::uint8_t>, kHnLayers + 1> pool_argmax;
};

struct ActivationTrace {
  std::array<std::array<int, 3>, kHnLayers + 1> layer_dims{};  // (C, H, W) of outputs[i]
  std::array<std::array<int, 3>, 7> pooled{};                  // O2..O6 at [2..6]
  std::array<std::array<int, 3>, 6> transposed{};              // T1..T5 at [1..5]
};

class HNModel {
 public:
  static HNModel build(std::uint64_t seed, float leaky_slope = 0.1f, int width_divisor = 1);
  static HNModel load(const std::filesystem::path& path, int width_divisor = 1);

  void save(const std::filesystem::path& path) const;

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  float leaky_slope() const noexcept { return leaky_slope_; }
  int width_divisor() const noexcept { return width_divisor_; }

  // Weights and biases only, in layer order.
  const std::vector<NamedTensor>& parameters() const noexcept { return params_; }
  std::vector<NamedTensor>& parameters() noexcept { return params_; }
  std::size_t param_count() const noexcept;
  ParamGrads zero_grads() const;

  // Shapes of everything stored in a checkpoint, in file order.
  std::vector<TensorShape> checkpoint_shapes() const;

  // Raw network output (no clamping); H and W must be multiples of 32.
  Tensor forward(const Tensor& x) const;
  Tensor forward(const Tensor& x, HNTape& tape) const;
  // Accumulates parameter gradients into `grads`; optionally returns the
  // gradient with respect to the input.
  void backward(const HNTape& tape, const Tensor& grad_output, ParamGrads& grads,
                Tensor* grad_input = nullptr) const;

  // Inference on any size: reflect-pad to a multiple of 32, run, crop back
  // to the original size and clamp into [0,1]. Accepts 1/3/4 channels; the
  // result is RGB.
  Image restore(const Image& img) const;

  ActivationTrace trace(const Tensor& x) const;

 private:
  struct LayerParams {
    int conv_kernel = -1;
    int conv_bias = -1;
    int up_kernel = -1;
    int up_bias = -1;
  };

  HNModel() = default;

  std::vector<LayerSpec> layers_;
  std::vector<LayerParams> layer_params_;
  std::vector<NamedTensor> params_;
  float leaky_slope_ = 0.1f;
  int width_divisor_ = 1;
};

// param_count for a single layer of the table (conv plus transpose conv).
std::size_t layer_param_count(const LayerSpec& layer);

// Reflect padding (no edge repeat) of a planar tensor.
Tensor reflect_pad(const Tensor& t, int top, int bottom, int left, int right);

}  // namespace swcnn
