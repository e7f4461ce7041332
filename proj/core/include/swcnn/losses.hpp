#pragma once

#include <span>

#include "swcnn/pn_features.hpp"
#include "swcnn/tensor.hpp"

namespace swcnn {

enum class Norm { kL1, kL2 };

struct MixedLossConfig {
  double lambda = 1.0;
  Norm norm = Norm::kL1;
  const PNFeatureExtractor* pn = nullptr;  // required when lambda > 0
};

// Mean over the batch of the per-image mean absolute (L1) or squared (L2)
// difference.
double structural_loss(std::span<const Tensor> pred, std::span<const Tensor> ref, Norm norm);

// Same reduction applied to PN features of prediction and reference.
double texture_loss(std::span<const Tensor> pred, std::span<const Tensor> ref,
                    const PNFeatureExtractor& pn, Norm norm = Norm::kL1);

// structural + lambda * texture.
double mixed_loss(std::span<const Tensor> pred, std::span<const Tensor> ref,
                  const MixedLossConfig& cfg);

struct SampleLoss {
  double structural = 0.0;
  double texture = 0.0;
  double total = 0.0;  // structural + lambda * texture, before batch weighting
};

// Loss of a single image and, when grad_pred is given, the gradient of
// `weight * total` with respect to pred (overwritten).
SampleLoss sample_loss(const Tensor& pred, const Tensor& ref, const MixedLossConfig& cfg,
                       double weight, Tensor* grad_pred);

// Per-element distance and its gradient scaled by `scale` (added into grad
// when non-null).
double distance(const Tensor& a, const Tensor& b, Norm norm, double scale, Tensor* grad);

}  // namespace swcnn
