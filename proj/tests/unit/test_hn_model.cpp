#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "ref_net.hpp"
#include "swcnn/error.hpp"
#include "swcnn/hn_model.hpp"

using namespace swcnn;

TEST_CASE("layer table matches the published architecture row by row") {
  using K = LayerKind;
  struct Row {
    K kind;
    int in, out;
  };
  const Row expected[18] = {
      {K::kConvRelu, 3, 48},            {K::kConvReluMaxPool, 48, 48},
      {K::kConvReluMaxPool, 48, 48},    {K::kConvReluMaxPool, 48, 48},
      {K::kConvReluMaxPool, 48, 48},    {K::kConvReluMaxPool, 48, 48},
      {K::kConvReluTranspose, 48, 48},  {K::kConvRelu, 96, 96},
      {K::kConvReluTranspose, 96, 96},  {K::kConvRelu, 144, 96},
      {K::kConvReluTranspose, 96, 96},  {K::kConvRelu, 144, 96},
      {K::kConvReluTranspose, 96, 96},  {K::kConvRelu, 144, 96},
      {K::kConvReluTranspose, 96, 96},  {K::kConvRelu, 99, 64},
      {K::kConvRelu, 64, 32},           {K::kConvLeakyRelu, 32, 3}};
  const auto model = HNModel::build(1);
  REQUIRE(model.layers().size() == 18);
  for (int i = 0; i < 18; ++i) {
    const auto& l = model.layers()[i];
    CAPTURE(i + 1);
    CHECK(l.index == i + 1);
    CHECK(l.kind == expected[i].kind);
    CHECK(l.in_channels == expected[i].in);
    CHECK(l.out_channels == expected[i].out);
    CHECK(l.kernel == 3);
  }
  CHECK(model.layers()[0].in_channels == 3);
  CHECK(model.layers()[15].in_channels == 99);
  CHECK(model.layers()[7].concat_source == 5);
  CHECK(model.layers()[9].concat_source == 4);
  CHECK(model.layers()[11].concat_source == 3);
  CHECK(model.layers()[13].concat_source == 2);
  CHECK(model.layers()[15].concat_source == 0);
}

TEST_CASE("parameter count equals the closed-form table sum") {
  const auto model = HNModel::build(1);
  CHECK(layer_param_count(model.layers()[0]) == 1344);
  CHECK(layer_param_count(model.layers()[17]) == 867);
  CHECK(model.param_count() == static_cast<std::size_t>(oracle::hn_param_count()));
  CHECK(model.param_count() == 1148307);
  const auto small = HNModel::build(1, 0.1f, 8);
  CHECK(small.param_count() == static_cast<std::size_t>(oracle::hn_param_count(8)));
}

TEST_CASE("build is deterministic per seed") {
  const auto a = HNModel::build(42);
  const auto b = HNModel::build(42);
  const auto c = HNModel::build(43);
  CHECK(a.parameters() == b.parameters());
  CHECK_FALSE(a.parameters() == c.parameters());
  CHECK(a.leaky_slope() == doctest::Approx(0.1f));
}

TEST_CASE("shape round trip and activation trace") {
  const auto model = HNModel::build(3, 0.1f, 8);
  Rng rng(4);
  for (int s : {32, 64, 96, 128, 256}) {
    const Tensor x = oracle::random_tensor(rng, 3, s, s, 0.0, 1.0);
    const Tensor y = model.forward(x);
    CHECK(y.c == 3);
    CHECK(y.h == s);
    CHECK(y.w == s);
  }
  const Tensor x = oracle::random_tensor(rng, 3, 96, 160, 0.0, 1.0);
  const Tensor y = model.forward(x);
  CHECK((y.h == 96 && y.w == 160));

  const auto trace = model.trace(oracle::random_tensor(rng, 3, 256, 256, 0.0, 1.0));
  const int expected_pooled[7] = {0, 0, 128, 64, 32, 16, 8};
  for (int i = 2; i <= 6; ++i) CHECK(trace.pooled[i][1] == expected_pooled[i]);
  const int expected_transposed[6] = {0, 256, 128, 64, 32, 16};
  for (int j = 1; j <= 5; ++j) CHECK(trace.transposed[j][1] == expected_transposed[j]);
  CHECK(trace.layer_dims[18] == std::array<int, 3>{3, 256, 256});
  CHECK(trace.layer_dims[1] == std::array<int, 3>{6, 256, 256});
}

TEST_CASE("full-width network keeps 256x256") {
  const auto model = HNModel::build(5);
  Rng rng(6);
  const Tensor y = model.forward(oracle::random_tensor(rng, 3, 256, 256, 0.0, 1.0));
  CHECK((y.c == 3 && y.h == 256 && y.w == 256));
}

TEST_CASE("forward rejects bad inputs") {
  const auto model = HNModel::build(5, 0.1f, 8);
  CHECK_THROWS_AS(model.forward(Tensor(1, 32, 32)), Error);
  CHECK_THROWS_AS(model.forward(Tensor(3, 40, 32)), Error);
}

TEST_CASE("restore pads, crops and clamps arbitrary sizes") {
  const auto model = HNModel::build(7, 0.1f, 8);
  Rng rng(8);
  const Image img = oracle::random_image(rng, 33, 50, 3);
  const Image out = model.restore(img);
  CHECK(out.height() == 33);
  CHECK(out.width() == 50);
  CHECK(out.channels() == 3);
  for (float v : out.pixels()) CHECK((v >= 0.0f && v <= 1.0f));
  CHECK(model.restore(img) == out);
}

TEST_CASE("reflect padding mirrors without repeating the edge") {
  Tensor t(1, 1, 3);
  t.data = {1, 2, 3};
  const Tensor p = reflect_pad(t, 0, 0, 2, 3);
  CHECK(p.data == std::vector<float>{3, 2, 1, 2, 3, 2, 1, 2});
}


TEST_CASE("forward agrees with a double-precision reference and gradients with its central differences") {
  HNModel model = HNModel::build(11, 0.1f, 8);
  Rng rng(12);
  // Zero biases put dead-unit pre-activations exactly on the ReLU kink.
  for (auto& p : model.parameters())
    if (p.name.ends_with(".bias"))
      for (float& v : p.values) v = static_cast<float>(rng.uniform(-0.05, 0.05));
  const Tensor x = oracle::random_tensor(rng, 3, 32, 32, 0.0, 1.0);
  // Linear probe loss <r, f(x)>.
  const Tensor r = oracle::random_tensor(rng, 3, 32, 32);

  ref::Params dp;
  for (const auto& p : model.parameters()) dp.emplace_back(p.values.begin(), p.values.end());
  const ref::DT dx = ref::to_dt(x);
  auto ref_loss = [&]() {
    const ref::DT y = ref::hn_forward(model.layers(), dp, dx, model.leaky_slope());
    double s = 0.0;
    for (std::size_t i = 0; i < y.v.size(); ++i) s += y.v[i] * r.data[i];
    return s;
  };

  HNTape tape;
  const Tensor y = model.forward(x, tape);
  const ref::DT yref = ref::hn_forward(model.layers(), dp, dx, model.leaky_slope());
  double max_err = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) max_err = std::max(max_err, std::abs(y.data[i] - yref.v[i]));
  CHECK(max_err < 1e-4);

  ParamGrads grads = model.zero_grads();
  Tensor grad_x;
  model.backward(tape, r, grads, &grad_x);

  const double eps = 1e-6;
  int checked = 0, passed = 0;
  while (checked < 150) {
    const std::size_t p = rng.below(dp.size());
    const std::size_t i = rng.below(dp[p].size());
    const double saved = dp[p][i];
    dp[p][i] = saved + eps;
    const double lp = ref_loss();
    dp[p][i] = saved - eps;
    const double lm = ref_loss();
    dp[p][i] = saved;
    const double fd = (lp - lm) / (2 * eps);
    const double an = grads[p][i];
    ++checked;
    if (std::abs(an - fd) <= 1e-2 * std::max(std::abs(an), std::abs(fd)) + 1e-5) ++passed;
    else MESSAGE(model.parameters()[p].name << "[" << i << "] analytic=" << an << " fd=" << fd);
  }
  CHECK(passed == checked);

  // Input gradient along a random direction.
  const Tensor dir = oracle::random_tensor(rng, 3, 32, 32);
  ref::DT xp = dx, xm = dx;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    xp.v[i] += eps * dir.data[i];
    xm.v[i] -= eps * dir.data[i];
  }
  auto loss_on = [&](const ref::DT& in) {
    const ref::DT o = ref::hn_forward(model.layers(), dp, in, model.leaky_slope());
    double s = 0.0;
    for (std::size_t i = 0; i < o.v.size(); ++i) s += o.v[i] * r.data[i];
    return s;
  };
  const double fd = (loss_on(xp) - loss_on(xm)) / (2 * eps);
  double an = 0.0;
  for (std::size_t i = 0; i < dir.size(); ++i) an += double(grad_x.data[i]) * dir.data[i];
  CHECK(an == doctest::Approx(fd).epsilon(1e-3));
}

// Per tensor, not per element: at 32x32 the bottleneck is 1x1 and only the
// centre tap of L7 sees data. Exact wiring is covered by the reference above.
TEST_CASE("every parameter tensor receives gradient") {
  const auto model = HNModel::build(13);
  Rng rng(14);
  ParamGrads grads = model.zero_grads();
  for (int b = 0; b < 2; ++b) {
    const Tensor x = oracle::random_tensor(rng, 3, 32, 32, 0.0, 1.0);
    const Tensor r = oracle::random_tensor(rng, 3, 32, 32);
    HNTape tape;
    model.forward(x, tape);
    model.backward(tape, r, grads);
  }
  for (std::size_t p = 0; p < grads.size(); ++p) {
    std::size_t nonzero = 0;
    for (float g : grads[p]) nonzero += (g != 0.0f);
    CAPTURE(model.parameters()[p].name);
    CHECK(nonzero > 0);
  }
}

TEST_CASE("forward is deterministic") {
  const auto model = HNModel::build(15, 0.1f, 4);
  Rng rng(16);
  const Tensor x = oracle::random_tensor(rng, 3, 64, 64, 0.0, 1.0);
  CHECK(model.forward(x) == model.forward(x));
}
