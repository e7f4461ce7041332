#include "swcnn/pn_features.hpp"

#include <cmath>

#include "swcnn/error.hpp"
#include "swcnn/nn_ops.hpp"
#include "swcnn/rng.hpp"

namespace swcnn {

std::vector<TensorShape> PNFeatureExtractor::checkpoint_shapes() {
  std::vector<TensorShape> shapes;
  for (int i = 1; i <= 4; ++i) {
    const auto ci = static_cast<std::uint32_t>(kWidths[i - 1]);
    const auto co = static_cast<std::uint32_t>(kWidths[i]);
    shapes.push_back({"pn.conv" + std::to_string(i) + ".kernel", {co, ci, 3, 3}});
    shapes.push_back({"pn.conv" + std::to_string(i) + ".bias", {co}});
  }
  return shapes;
}

PNFeatureExtractor PNFeatureExtractor::load(const std::optional<std::filesystem::path>& weights_path,
                                            std::uint64_t seed) {
  PNFeatureExtractor pn;
  const auto shapes = checkpoint_shapes();
  if (weights_path) {
    pn.weights_ = read_checkpoint(*weights_path, &shapes);
    pn.source_ = PNSource::kPretrainedFile;
    return pn;
  }
  pn.source_ = PNSource::kSeededRandom;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    NamedTensor t{shapes[i].name, shapes[i].dims, {}};
    t.values.resize(t.numel());
    if (i % 2 == 0) {
      const double fan_in = static_cast<double>(t.dims[1]) * 9.0;
      const double bound = std::sqrt(6.0 / fan_in);
      Rng rng(derive_seed(seed, 0x504E0000ULL + i));
      for (auto& v : t.values) v = static_cast<float>(rng.uniform(-bound, bound));
    } else {
      std::fill(t.values.begin(), t.values.end(), 0.0f);
    }
    pn.weights_.push_back(std::move(t));
  }
  return pn;
}

Tensor PNFeatureExtractor::extract(const Tensor& img) const {
  PNTape tape;
  return extract(img, tape);
}

Tensor PNFeatureExtractor::extract(const Tensor& img, PNTape& tape) const {
  if (img.c != 3) throw Error("PN expects a 3-channel input, got " + std::to_string(img.c));
  if (img.h % 2 != 0 || img.w % 2 != 0) {
    throw Error("PN input " + std::to_string(img.h) + "x" + std::to_string(img.w) +
                " must have even dimensions");
  }
  tape.input = img;
  const Tensor* x = &tape.input;
  for (int i = 0; i < 4; ++i) {
    nn::conv3x3_forward(*x, weights_[2 * i].values, weights_[2 * i + 1].values, kWidths[i + 1],
                        tape.activations[i]);
    nn::relu_inplace(tape.activations[i]);
    x = &tape.activations[i];
    if (i == 1) {
      nn::maxpool2x2_forward(tape.activations[i], tape.pooled, tape.pool_argmax);
      x = &tape.pooled;
    }
  }
  return tape.activations[3];
}

Tensor PNFeatureExtractor::input_gradient(const PNTape& tape, const Tensor& grad_features) const {
  Tensor g = grad_features;
  for (int i = 3; i >= 0; --i) {
    nn::relu_backward_inplace(tape.activations[i], g);
    const Tensor& in = i == 0 ? tape.input : (i == 2 ? tape.pooled : tape.activations[i - 1]);
    Tensor gi;
    nn::conv3x3_backward(in, g, weights_[2 * i].values, {}, {}, &gi);
    if (i == 2) {
      nn::maxpool2x2_backward(gi, tape.pool_argmax, g);
    } else {
      g = std::move(gi);
    }
  }
  return g;
}

void PNFeatureExtractor::save(const std::filesystem::path& path) const {
  write_checkpoint(path, weights_);
}

}  // namespace swcnn
