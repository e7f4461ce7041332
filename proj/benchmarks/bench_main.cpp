#include <benchmark/benchmark.h>

#include <vector>

#include "swcnn/checkpoint.hpp"
#include "swcnn/hn_model.hpp"
#include "swcnn/losses.hpp"
#include "swcnn/metrics.hpp"
#include "swcnn/nn_ops.hpp"
#include "swcnn/pn_features.hpp"
#include "swcnn/rng.hpp"
#include "swcnn/watermark.hpp"

using namespace swcnn;

namespace {

Tensor random_tensor(int c, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(c, h, w);
  for (auto& v : t.data) v = static_cast<float>(rng.uniform());
  return t;
}

Image random_image(int h, int w, int c, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w, c);
  for (auto& v : img.pixels()) v = static_cast<float>(rng.uniform());
  return img;
}

std::vector<float> weights(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-0.05, 0.05));
  return v;
}

// args: channels in/out, side
void BM_Conv3x3Forward(benchmark::State& state) {
  const int ci = static_cast<int>(state.range(0)), side = static_cast<int>(state.range(1));
  const Tensor x = random_tensor(ci, side, side, 1);
  const auto k = weights(std::size_t(ci) * ci * 9, 2);
  const std::vector<float> b(ci, 0.0f);
  Tensor y;
  for (auto _ : state) {
    nn::conv3x3_forward(x, k, b, ci, y);
    benchmark::DoNotOptimize(y.data.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * ci * ci * 9 * side * side,
                                                 benchmark::Counter::kIsIterationInvariantRate,
                                                 benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Conv3x3Forward)->Args({48, 64})->Args({48, 256})->Args({96, 32})->Args({128, 64});

void BM_Conv3x3Backward(benchmark::State& state) {
  const int ci = static_cast<int>(state.range(0)), side = static_cast<int>(state.range(1));
  const Tensor x = random_tensor(ci, side, side, 1);
  const Tensor dy = random_tensor(ci, side, side, 3);
  const auto k = weights(std::size_t(ci) * ci * 9, 2);
  std::vector<float> dk(k.size()), db(ci);
  Tensor dx;
  for (auto _ : state) {
    nn::conv3x3_backward(x, dy, k, dk, db, &dx);
    benchmark::DoNotOptimize(dx.data.data());
  }
}
BENCHMARK(BM_Conv3x3Backward)->Args({48, 64})->Args({96, 32});

void BM_HNForward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const HNModel model = HNModel::build(1);
  const Tensor x = random_tensor(3, side, side, 4);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x).data.data());
}
BENCHMARK(BM_HNForward)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

// One sample of a training step: forward, mixed loss, backward.
void BM_HNTrainSample(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const double lambda = static_cast<double>(state.range(1));
  const HNModel model = HNModel::build(1);
  const PNFeatureExtractor pn = PNFeatureExtractor::load(std::nullopt, 2);
  const MixedLossConfig cfg{lambda, Norm::kL1, &pn};
  const Tensor x = random_tensor(3, side, side, 4);
  const Tensor ref = random_tensor(3, side, side, 5);
  ParamGrads grads = model.zero_grads();
  HNTape tape;
  Tensor grad;
  for (auto _ : state) {
    const Tensor pred = model.forward(x, tape);
    sample_loss(pred, ref, cfg, 1.0, &grad);
    model.backward(tape, grad, grads);
  }
}
BENCHMARK(BM_HNTrainSample)->Args({64, 0})->Args({64, 1})->Unit(benchmark::kMillisecond);

void BM_PNExtract(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const PNFeatureExtractor pn = PNFeatureExtractor::load(std::nullopt, 2);
  const Tensor x = random_tensor(3, side, side, 6);
  for (auto _ : state) benchmark::DoNotOptimize(pn.extract(x).data.data());
}
BENCHMARK(BM_PNExtract)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Blend(benchmark::State& state) {
  const Image clean = random_image(256, 256, 3, 7);
  const WatermarkAsset asset = make_asset("w", random_image(48, 48, 4, 8));
  PlacementSpec spec;
  spec.row = 40;
  spec.col = 60;
  spec.scale = 1.5;
  spec.transparency = 0.5;
  spec.watermark_id = "w";
  for (auto _ : state) benchmark::DoNotOptimize(blend(clean, asset, spec).pixels().data());
}
BENCHMARK(BM_Blend);

void BM_Metrics(benchmark::State& state) {
  const Image a = random_image(256, 256, 3, 9), b = random_image(256, 256, 3, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(psnr(a, b));
    benchmark::DoNotOptimize(ssim(a, b));
  }
}
BENCHMARK(BM_Metrics)->Unit(benchmark::kMillisecond);

void BM_CheckpointEncodeDecode(benchmark::State& state) {
  const HNModel model = HNModel::build(1);
  for (auto _ : state) {
    const auto bytes = encode_checkpoint(model.parameters());
    benchmark::DoNotOptimize(decode_checkpoint(bytes).size());
  }
}
BENCHMARK(BM_CheckpointEncodeDecode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
