#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "srdiag/error.hpp"
#include "srdiag/losses/losses.hpp"
#include "srdiag/rng.hpp"

using namespace srdiag;
using nn::Shape;
using nn::Tensor;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

TEST(PixelLoss, IsMeanAbsoluteDifference) {
  const Tensor<double> hr({1, 1, 1, 4}, std::vector<double>{0, 1, 2, 3});
  const Tensor<double> sr({1, 1, 1, 4}, std::vector<double>{1, 1, 0, 3.5});
  Tensor<double> grad;
  EXPECT_DOUBLE_EQ(pixel_loss(hr, sr, &grad), (1 + 0 + 2 + 0.5) / 4.0);
  EXPECT_DOUBLE_EQ(grad[0], 0.25);
  EXPECT_DOUBLE_EQ(grad[2], -0.25);
  EXPECT_DOUBLE_EQ(grad[3], 0.25);
}

TEST(PixelLoss, RejectsShapeMismatch) {
  EXPECT_THROW(pixel_loss(Tensor<double>({1, 3, 4, 4}), Tensor<double>({1, 3, 4, 5})), InvalidArgument);
}

TEST(Relativistic, OutputComparesAgainstOtherBatchMean) {
  const std::vector<double> a{1.0, 3.0}, b{0.0, 2.0};
  const auto d = relativistic_output(a, b);
  EXPECT_NEAR(d[0], sigmoid(1.0 - 1.0), 1e-15);
  EXPECT_NEAR(d[1], sigmoid(3.0 - 1.0), 1e-15);
}

TEST(Relativistic, DiscriminatorLossByHand) {
  const std::vector<double> hr{2.0}, sr{-1.0};
  const double expected = -std::log(sigmoid(3.0)) - std::log(1.0 - sigmoid(-3.0));
  EXPECT_NEAR(discriminator_loss(hr, sr), expected, 1e-12);
  const double g_expected = -std::log(1.0 - sigmoid(3.0)) - std::log(sigmoid(-3.0));
  EXPECT_NEAR(generator_adv_loss(hr, sr), g_expected, 1e-12);
}

TEST(Relativistic, LossesAreSymmetricUnderSwap) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(4), b(4);
    for (auto& v : a) v = 3 * rng.normal();
    for (auto& v : b) v = 3 * rng.normal();
    EXPECT_NEAR(discriminator_loss(a, b), generator_adv_loss(b, a), 1e-12);
  }
}

TEST(Relativistic, SaturatedLogitsStayFinite) {
  const std::vector<double> hr{1e4}, sr{-1e4};
  std::vector<double> gh, gs;
  const double g = generator_adv_loss(hr, sr, &gh, &gs);
  EXPECT_TRUE(std::isfinite(g));
  EXPECT_NEAR(g, -2 * std::log(kLogClamp), 1e-6);
  EXPECT_TRUE(std::isfinite(gh[0]) && std::isfinite(gs[0]));
  EXPECT_NEAR(discriminator_loss(hr, sr), 0.0, 1e-12);
}

TEST(Relativistic, GradientsSumToZeroAcrossBothBatches) {
  Rng rng(2);
  std::vector<double> a(5), b(3), ga, gb;
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  discriminator_loss(a, b, &ga, &gb);
  double sum = 0;
  for (double g : ga) sum += g;
  for (double g : gb) sum += g;
  EXPECT_NEAR(sum, 0.0, 1e-12);
}

TEST(Perceptual, ZeroForIdenticalImagesAndPositiveOtherwise) {
  const auto fx = FeatureExtractor<double>::random(1, 2);
  Rng rng(3);
  Tensor<double> hr({1, 3, 32, 32});
  for (double& v : hr.values()) v = rng.uniform01();
  EXPECT_EQ(perceptual_loss(fx, hr, hr), 0.0);
  Tensor<double> sr = hr;
  for (double& v : sr.values()) v = std::min(1.0, v + 0.1 * rng.uniform01());
  EXPECT_GT(perceptual_loss(fx, hr, sr), 0.0);
  EXPECT_THROW(perceptual_loss(fx, Tensor<double>({1, 3, 16, 16}), Tensor<double>({1, 3, 16, 16})), InvalidArgument);
}

TEST(TotalLoss, CombinesTermsWithWeights) {
  const auto fx = FeatureExtractor<double>::random(2, 2);
  Rng rng(4);
  Tensor<double> hr({2, 3, 32, 32}), sr({2, 3, 32, 32});
  for (double& v : hr.values()) v = rng.uniform01();
  for (double& v : sr.values()) v = rng.uniform01();
  const std::vector<double> c_hr{0.5, -0.2}, c_sr{0.1, 0.3};
  const LossWeights w{0.5, 0.25};
  const auto l = total_generator_loss(fx, w, hr, sr, c_hr, c_sr);
  EXPECT_NEAR(l.perceptual, perceptual_loss(fx, hr, sr), 1e-12);
  EXPECT_NEAR(l.adversarial, generator_adv_loss(c_hr, c_sr), 1e-12);
  EXPECT_NEAR(l.pixel, pixel_loss(hr, sr), 1e-12);
  EXPECT_NEAR(l.total, l.perceptual + 0.5 * l.adversarial + 0.25 * l.pixel, 1e-12);
}

TEST(TotalLoss, DefaultWeights) {
  const LossWeights w;
  EXPECT_EQ(w.lambda, 5e-3);
  EXPECT_EQ(w.eta, 1e-2);
  EXPECT_THROW((LossWeights{-1.0, 1e-2}.validate()), InvalidArgument);
}

}  // namespace
