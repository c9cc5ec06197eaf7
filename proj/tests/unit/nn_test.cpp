#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "srdiag/error.hpp"
#include "srdiag/nn/adam.hpp"
#include "srdiag/nn/conv_unit.hpp"
#include "srdiag/nn/layers.hpp"
#include "srdiag/rng.hpp"

using namespace srdiag;
using namespace srdiag::nn;
using srdiag::testing::central_difference_check;
using srdiag::testing::naive_conv2d;

namespace {

Tensor<double> random_tensor(Shape s, Rng& rng) {
  Tensor<double> t(s);
  for (double& v : t.values()) v = rng.normal();
  return t;
}

FeatureView<const double> cv(const Tensor<double>& t) { return view(t); }

std::vector<double> flat(const Tensor<double>& t) { return {t.values().begin(), t.values().end()}; }

Tensor<double> unflat(Shape s, const std::vector<double>& v) { return Tensor<double>(s, v); }

double dot(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Probe loss sum(r * y) for a fixed random r.
struct Probe {
  Tensor<double> r;
  double operator()(const Tensor<double>& y) const { return dot(r, y); }
};

struct ConvCase {
  int in, out, k, stride, pad, size;
};

class ConvAgainstNaive : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvAgainstNaive, ForwardMatches) {
  const auto p = GetParam();
  Rng rng(1);
  Conv2d<double> conv(p.in, p.out, p.k, p.stride, p.pad);
  conv.init(rng);
  for (double& b : conv.bias.value.values()) b = rng.normal();
  const auto x = random_tensor({2, p.in, p.size, p.size}, rng);
  const int o = conv.output_size(p.size);
  Tensor<double> y({2, p.out, o, o});
  conv.forward(cv(x), view(y));
  const auto ref = naive_conv2d(x, conv.weight.value, conv.bias.value, p.stride, p.pad);
  ASSERT_EQ(y.shape(), ref.shape());
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-10);
}

TEST_P(ConvAgainstNaive, BackwardMatchesFiniteDifferences) {
  const auto p = GetParam();
  Rng rng(2);
  Conv2d<double> conv(p.in, p.out, p.k, p.stride, p.pad);
  conv.init(rng);
  const Shape xs{2, p.in, p.size, p.size};
  auto x = random_tensor(xs, rng);
  const int o = conv.output_size(p.size);
  const Probe probe{random_tensor({2, p.out, o, o}, rng)};
  auto loss = [&](const Tensor<double>& in) {
    Tensor<double> y({2, p.out, o, o});
    conv.forward(cv(in), view(y));
    return probe(y);
  };

  Tensor<double> dx(xs, 0.0);
  conv.weight.zero_grad();
  conv.bias.zero_grad();
  auto dxv = view(dx);
  conv.backward(cv(x), cv(probe.r), &dxv, true);

  auto xv = flat(x);
  const auto gx = central_difference_check(xv, flat(dx), [&](const std::vector<double>& v) { return loss(unflat(xs, v)); });
  EXPECT_EQ(gx.fraction(), 1.0) << "worst " << gx.worst;

  auto wv = flat(conv.weight.value);
  const Shape ws = conv.weight.value.shape();
  const auto gw = central_difference_check(wv, flat(conv.weight.grad), [&](const std::vector<double>& v) {
    const auto saved = conv.weight.value;
    conv.weight.value = unflat(ws, v);
    const double l = loss(x);
    conv.weight.value = saved;
    return l;
  });
  EXPECT_EQ(gw.fraction(), 1.0) << "worst " << gw.worst;

  for (int c = 0; c < p.out; ++c) {
    double expect = 0;
    for (int n = 0; n < 2; ++n)
      for (int y = 0; y < o; ++y)
        for (int xx = 0; xx < o; ++xx) expect += probe.r(n, c, y, xx);
    EXPECT_NEAR(conv.bias.grad[c], expect, 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, ConvAgainstNaive,
                         ::testing::Values(ConvCase{3, 4, 3, 1, 1, 7}, ConvCase{2, 3, 1, 1, 0, 5},
                                           ConvCase{3, 2, 5, 1, 2, 6}, ConvCase{2, 3, 4, 2, 1, 8},
                                           ConvCase{3, 3, 3, 2, 1, 9}, ConvCase{1, 2, 3, 1, 0, 6}),
                         [](const ::testing::TestParamInfo<ConvCase>& info) {
                           const auto& p = info.param;
                           return "c" + std::to_string(p.in) + "to" + std::to_string(p.out) + "_k" + std::to_string(p.k) +
                                  "_s" + std::to_string(p.stride) + "_p" + std::to_string(p.pad) + "_n" +
                                  std::to_string(p.size);
                         });

TEST(Conv2d, ChannelPrefixViewsReadOnlyThePrefix) {
  Rng rng(3);
  Conv2d<double> conv(2, 3, 3, 1, 1);
  conv.init(rng);
  auto wide = random_tensor({2, 5, 6, 6}, rng);
  Tensor<double> narrow;
  copy_view(channel_prefix(std::as_const(wide), 2), narrow);
  Tensor<double> a({2, 3, 6, 6}), b({2, 3, 6, 6});
  conv.forward(channel_prefix(std::as_const(wide), 2), view(a));
  conv.forward(view(std::as_const(narrow)), view(b));
  EXPECT_EQ(a, b);
}

TEST(Conv2d, RejectsInvalidGeometry) {
  EXPECT_THROW(Conv2d<float>(0, 3, 3, 1, 1), InvalidArgument);
  EXPECT_THROW(Conv2d<float>(3, 3, 3, 0, 1), InvalidArgument);
}

TEST(BatchNorm, TrainBackwardMatchesFiniteDifferences) {
  Rng rng(4);
  BatchNorm2d<double> bn(3);
  for (double& g : bn.gamma.value.values()) g = 1.0 + 0.3 * rng.normal();
  for (double& b : bn.beta.value.values()) b = 0.3 * rng.normal();
  const Shape s{3, 3, 4, 4};
  auto x = random_tensor(s, rng);
  const Probe probe{random_tensor(s, rng)};
  auto loss = [&](const Tensor<double>& in) {
    Tensor<double> y(s);
    BatchNormTrace<double> tr;
    bn.forward(cv(in), view(y), Mode::kTrain, false, tr);
    return probe(y);
  };
  Tensor<double> y(s), dx(s);
  BatchNormTrace<double> tr;
  bn.forward(cv(x), view(y), Mode::kTrain, false, tr);
  bn.gamma.zero_grad();
  bn.beta.zero_grad();
  bn.backward(tr, cv(probe.r), view(dx), true);
  auto xv = flat(x);
  const auto g = central_difference_check(xv, flat(dx), [&](const std::vector<double>& v) { return loss(unflat(s, v)); },
                                          1e-5, 1e-4, 1e-8);
  EXPECT_EQ(g.fraction(), 1.0) << "worst " << g.worst;
}

TEST(BatchNorm, RunningStatisticsFollowMomentum) {
  BatchNorm2d<double> bn(1);
  Tensor<double> x({2, 1, 1, 2}, std::vector<double>{1, 3, 5, 7});
  Tensor<double> y(x.shape());
  BatchNormTrace<double> tr;
  bn.forward(cv(x), view(y), Mode::kTrain, true, tr);
  const double m = BatchNorm2d<double>::kMomentum;
  EXPECT_NEAR(bn.running_mean[0], (1 - m) * 4.0, 1e-12);
  bn.forward(cv(x), view(y), Mode::kTrain, false, tr);
  EXPECT_NEAR(bn.running_mean[0], (1 - m) * 4.0, 1e-12);
  double mean = 0;
  for (double v : y.values()) mean += v / 4;
  EXPECT_NEAR(mean, 0.0, 1e-12);
}

TEST(Linear, BackwardMatchesFiniteDifferences) {
  Rng rng(5);
  Linear<double> fc(6, 4);
  fc.init(rng);
  const Shape s{3, 6, 1, 1};
  auto x = random_tensor(s, rng);
  const Probe probe{random_tensor({3, 4, 1, 1}, rng)};
  Tensor<double> dx;
  fc.weight.zero_grad();
  fc.backward(x, probe.r, &dx, true);
  auto xv = flat(x);
  const auto g = central_difference_check(xv, flat(dx), [&](const std::vector<double>& v) {
    Tensor<double> y;
    fc.forward(unflat(s, v), y);
    return probe(y);
  });
  EXPECT_EQ(g.fraction(), 1.0);
}

TEST(Pooling, MaxPoolRoutesGradientToWinner) {
  Tensor<double> x({1, 1, 2, 4}, std::vector<double>{1, 5, 2, 0, 3, 4, 9, 1});
  Tensor<double> y, dx;
  std::vector<std::size_t> arg;
  max_pool2x2(x, y, arg);
  EXPECT_EQ(y[0], 5);
  EXPECT_EQ(y[1], 9);
  max_pool2x2_backward(Tensor<double>({1, 1, 1, 2}, std::vector<double>{2, 3}), arg, x.shape(), dx);
  EXPECT_EQ(dx[1], 2);
  EXPECT_EQ(dx[6], 3);
  EXPECT_EQ(dx[0] + dx[2] + dx[3] + dx[4] + dx[5] + dx[7], 0);
}

TEST(Pooling, GlobalAverageAndUpsampleAreAdjoint) {
  Rng rng(6);
  const auto x = random_tensor({2, 3, 4, 4}, rng);
  Tensor<double> up;
  upsample_nearest2x(cv(x), up);
  EXPECT_EQ(up.shape(), (Shape{2, 3, 8, 8}));
  const auto r = random_tensor(up.shape(), rng);
  Tensor<double> back(x.shape());
  upsample_nearest2x_backward(r, back);
  EXPECT_NEAR(dot(up, r), dot(x, back), 1e-10);

  Tensor<double> pooled;
  global_avg_pool(x, pooled);
  const auto q = random_tensor(pooled.shape(), rng);
  Tensor<double> din;
  global_avg_pool_backward(q, x.shape(), din);
  EXPECT_NEAR(dot(pooled, q), dot(x, din), 1e-10);
}

TEST(Activation, LeakyReluBackwardUsesOutputSign) {
  Tensor<double> x({1, 1, 1, 4}, std::vector<double>{-2, -0.5, 0.5, 2});
  leaky_relu_inplace(view(x), 0.2);
  EXPECT_DOUBLE_EQ(x[0], -0.4);
  EXPECT_DOUBLE_EQ(x[3], 2);
  Tensor<double> g({1, 1, 1, 4}, 1.0);
  leaky_relu_backward_inplace(view(std::as_const(x)), view(g), 0.2);
  EXPECT_DOUBLE_EQ(g[0], 0.2);
  EXPECT_DOUBLE_EQ(g[2], 1.0);
}

TEST(Dropout, MaskIsInvertedAndReproducible) {
  Tensor<double> x({1, 1000, 1, 1}, 1.0);
  std::vector<double> mask, mask2;
  Rng a(7), b(7);
  auto x2 = x;
  dropout_forward(x, 0.5, a, mask);
  dropout_forward(x2, 0.5, b, mask2);
  EXPECT_EQ(mask, mask2);
  double mean = 0;
  for (double v : x.values()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    mean += v / 1000;
  }
  EXPECT_NEAR(mean, 1.0, 0.15);
}

TEST(ConvUnit, BackwardThroughBatchNormAndActivation) {
  Rng rng(8);
  ConvUnit<double> unit("u", 2, 3, 3, 2, 1, true, 0.2);
  unit.init(rng);
  const Shape s{2, 2, 6, 6};
  auto x = random_tensor(s, rng);
  const Probe probe{random_tensor({2, 3, 3, 3}, rng)};
  auto loss = [&](const Tensor<double>& in) {
    ConvUnitTrace<double> tr;
    unit.forward(cv(in), Mode::kTrain, false, tr);
    return probe(tr.post);
  };
  ConvUnitTrace<double> tr;
  unit.forward(cv(x), Mode::kTrain, false, tr);
  Tensor<double> g = probe.r, dx;
  unit.backward(cv(x), tr, g, &dx, false);
  auto xv = flat(x);
  const auto r = central_difference_check(xv, flat(dx), [&](const std::vector<double>& v) { return loss(unflat(s, v)); },
                                          1e-6, 1e-4, 1e-8);
  EXPECT_GE(r.fraction(), 0.98) << "worst " << r.worst;
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Param<double> p({1, 2, 1, 1}, {2});
  p.value[0] = 1.0;
  p.value[1] = -1.0;
  p.grad[0] = 0.3;
  p.grad[1] = -5.0;
  Adam<double> adam({{"p", &p}}, AdamConfig{0.1, 0.9, 0.999, 1e-8});
  adam.step();
  EXPECT_NEAR(p.value[0], 0.9, 1e-6);
  EXPECT_NEAR(p.value[1], -0.9, 1e-6);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, RejectsInvalidConfig) {
  EXPECT_THROW((AdamConfig{0.0, 0.9, 0.999, 1e-8}.validate()), InvalidArgument);
  EXPECT_THROW((AdamConfig{1e-3, 1.0, 0.999, 1e-8}.validate()), InvalidArgument);
}

TEST(Tensor, StorageIsCacheLineAligned) {
  for (int n = 1; n < 40; n += 7) {
    Tensor<float> t({1, n, 3, 3});
    EXPECT_EQ(reinterpret_cast<std::uintptr_t>(t.data()) % 64, 0u);
  }
}

}  // namespace
