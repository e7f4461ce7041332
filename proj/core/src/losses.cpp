#include "swcnn/losses.hpp"

#include <cmath>

#include "swcnn/error.hpp"
#include "swcnn/nn_ops.hpp"

namespace swcnn {

namespace {

void check_batch(std::span<const Tensor> pred, std::span<const Tensor> ref) {
  if (pred.size() != ref.size() || pred.empty()) {
    throw Error("loss: batch sizes differ or are empty (" + std::to_string(pred.size()) + " vs " +
                std::to_string(ref.size()) + ")");
  }
}

void check_lambda(const MixedLossConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw Error("loss: lambda must be a finite value >= 0, got " + std::to_string(cfg.lambda));
  }
}

}  // namespace

double distance(const Tensor& a, const Tensor& b, Norm norm, double scale, Tensor* grad) {
  if (!a.same_shape(b)) {
    throw Error("loss: shape mismatch (" + std::to_string(a.c) + "x" + std::to_string(a.h) + "x" +
                std::to_string(a.w) + " vs " + std::to_string(b.c) + "x" + std::to_string(b.h) +
                "x" + std::to_string(b.w) + ")");
  }
  const std::size_t n = a.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  if (grad != nullptr && !grad->same_shape(a)) *grad = Tensor(a.c, a.h, a.w);
  const float g_l1 = static_cast<float>(scale * inv_n);
  const float g_l2 = static_cast<float>(2.0 * scale * inv_n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    if (norm == Norm::kL1) {
      sum += std::abs(d);
      if (grad != nullptr) grad->data[i] += d > 0.0 ? g_l1 : (d < 0.0 ? -g_l1 : 0.0f);
    } else {
      sum += d * d;
      if (grad != nullptr) grad->data[i] += g_l2 * static_cast<float>(d);
    }
  }
  return sum * inv_n;
}

double structural_loss(std::span<const Tensor> pred, std::span<const Tensor> ref, Norm norm) {
  check_batch(pred, ref);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += distance(pred[i], ref[i], norm, 0.0, nullptr);
  return total / static_cast<double>(pred.size());
}

double texture_loss(std::span<const Tensor> pred, std::span<const Tensor> ref,
                    const PNFeatureExtractor& pn, Norm norm) {
  check_batch(pred, ref);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    total += distance(pn.extract(pred[i]), pn.extract(ref[i]), norm, 0.0, nullptr);
  }
  return total / static_cast<double>(pred.size());
}

double mixed_loss(std::span<const Tensor> pred, std::span<const Tensor> ref,
                  const MixedLossConfig& cfg) {
  check_lambda(cfg);
  const double s = structural_loss(pred, ref, cfg.norm);
  if (cfg.lambda == 0.0) return s;
  if (cfg.pn == nullptr) throw Error("mixed loss with lambda > 0 needs a PN extractor");
  return s + cfg.lambda * texture_loss(pred, ref, *cfg.pn, cfg.norm);
}

SampleLoss sample_loss(const Tensor& pred, const Tensor& ref, const MixedLossConfig& cfg,
                       double weight, Tensor* grad_pred) {
  check_lambda(cfg);
  SampleLoss out;
  if (grad_pred != nullptr) *grad_pred = Tensor(pred.c, pred.h, pred.w);
  out.structural = distance(pred, ref, cfg.norm, weight, grad_pred);
  out.total = out.structural;
  if (cfg.lambda == 0.0) return out;
  if (cfg.pn == nullptr) throw Error("mixed loss with lambda > 0 needs a PN extractor");
  PNTape tape;
  const Tensor fp = cfg.pn->extract(pred, tape);
  const Tensor fr = cfg.pn->extract(ref);
  Tensor grad_features;
  out.texture = distance(fp, fr, cfg.norm, weight * cfg.lambda,
                         grad_pred != nullptr ? &grad_features : nullptr);
  out.total += cfg.lambda * out.texture;
  if (grad_pred != nullptr) nn::add_inplace(*grad_pred, cfg.pn->input_gradient(tape, grad_features));
  return out;
}

}  // namespace swcnn
