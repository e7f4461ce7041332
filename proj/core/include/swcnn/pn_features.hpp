#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "swcnn/checkpoint.hpp"
#include "swcnn/tensor.hpp"

namespace swcnn {

enum class PNSource { kPretrainedFile, kSeededRandom };

struct PNTape {
  Tensor input;
  std::array<Tensor, 4> activations;  // after ReLU of conv1..conv4
  Tensor pooled;                      // conv2 output after 2x2 max pool
  std::vector<std::uint8_t> pool_argmax;
};

// Frozen perceptual feature extractor: conv 3->64, conv 64->64 + 2x2 max
// pool, conv 64->128, conv 128->128, all 3x3 with ReLU. The weights are
// fixed at construction; nothing here produces parameter gradients.
class PNFeatureExtractor {
 public:
  static constexpr std::array<int, 5> kWidths = {3, 64, 64, 128, 128};

  // Pretrained weights when `weights_path` is set, otherwise fixed seeded
  // random weights.
  static PNFeatureExtractor load(const std::optional<std::filesystem::path>& weights_path,
                                 std::uint64_t seed);

  PNSource source() const noexcept { return source_; }
  const std::vector<NamedTensor>& weights() const noexcept { return weights_; }
  static std::vector<TensorShape> checkpoint_shapes();

  // (128, H/2, W/2) features; needs 3 channels and even H, W.
  Tensor extract(const Tensor& img) const;
  Tensor extract(const Tensor& img, PNTape& tape) const;
  // d(loss)/d(img) given d(loss)/d(features).
  Tensor input_gradient(const PNTape& tape, const Tensor& grad_features) const;

  void save(const std::filesystem::path& path) const;

 private:
  PNFeatureExtractor() = default;

  std::vector<NamedTensor> weights_;  // conv{1..4}.{kernel,bias}
  PNSource source_ = PNSource::kSeededRandom;
};

}  // namespace swcnn
