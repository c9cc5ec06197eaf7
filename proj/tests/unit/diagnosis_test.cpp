#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.hpp"
#include "srdiag/datasets/synth.hpp"
#include "srdiag/diagnosis/diagnosis.hpp"
#include "srdiag/error.hpp"
#include "srdiag/imaging/transforms.hpp"
#include "srdiag/io/tensor_archive.hpp"

using namespace srdiag;

namespace {

TEST(Thresholds, GridIsTwentiethsExcludingEnds) {
  const auto g = threshold_grid();
  ASSERT_EQ(g.size(), 19u);
  EXPECT_EQ(g.front(), 0.05);
  EXPECT_EQ(g.back(), 0.95);
}

TEST(Thresholds, PerfectScoresTieToLowestThreshold) {
  const Matrix truth{{1, 0}, {0, 1}, {1, 1}};
  EXPECT_EQ(tune_thresholds(truth, truth), (ThresholdVector{0.05, 0.05}));
}

TEST(Thresholds, GapBetweenScoresPicksFirstOptimalGridPoint) {
  const Matrix p{{0.9}, {0.8}, {0.2}}, t{{1}, {1}, {0}};
  EXPECT_EQ(tune_thresholds(p, t), (ThresholdVector{0.25}));
}

TEST(Thresholds, ClassWithoutPositivesGetsOneHalf) {
  const Matrix p{{0.9, 0.1}, {0.3, 0.7}}, t{{1, 0}, {1, 0}};
  EXPECT_EQ(tune_thresholds(p, t)[1], 0.5);
}

TEST(Thresholds, EqualsExhaustiveGridSearch) {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(25), c = 1 + rng.uniform_int(6);
    Matrix p(n, std::vector<double>(c)), t(n, std::vector<double>(c));
    for (auto& row : p)
      for (double& v : row) v = trial % 3 == 0 ? static_cast<double>(rng.uniform_int(21)) / 20.0 : rng.uniform01();
    for (auto& row : t)
      for (double& v : row) v = rng.bernoulli(0.35);
    ASSERT_EQ(tune_thresholds(p, t), srdiag::testing::brute_force_thresholds(p, t)) << "trial " << trial;
  }
}

TEST(Thresholds, RaisingAThresholdNeverAddsThatClass) {
  Rng rng(2);
  const auto space = LabelSpace::synthetic(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> scores(4), th(4);
    for (double& s : scores) s = rng.uniform01();
    for (double& t : th) t = rng.uniform01();
    const auto before = decode_labels(scores, space, th);
    const int k = static_cast<int>(rng.uniform_int(4));
    th[k] = std::min(1.0, th[k] + rng.uniform01());
    const auto after = decode_labels(scores, space, th);
    const bool had = std::count(before.begin(), before.end(), space.name(k)) > 0;
    const bool has = std::count(after.begin(), after.end(), space.name(k)) > 0;
    EXPECT_TRUE(had || !has);
  }
}

TEST(Accuracy, SubsetAccuracyRequiresExactSets) {
  const std::vector<LabelSet> truth{{"a"}, {"a", "b"}, {"c"}, {"b"}};
  const std::vector<LabelSet> pred{{"a"}, {"b", "a"}, {"c", "a"}, {}};
  EXPECT_DOUBLE_EQ(subset_accuracy(pred, truth), 0.5);
  EXPECT_THROW(subset_accuracy({{"a"}}, truth), InvalidArgument);
}

TEST(ThresholdFile, RoundTripsAndChecksLabelSpace) {
  const auto path = std::filesystem::temp_directory_path() / "srdiag_thresholds_test.json";
  const auto space = LabelSpace::synthetic(3);
  const ThresholdVector th{0.05, 0.35, 0.9};
  save_thresholds(path, th, space);
  EXPECT_EQ(load_thresholds(path, space), th);
  EXPECT_ANY_THROW(load_thresholds(path, LabelSpace::synthetic(4)));
  EXPECT_ANY_THROW(load_thresholds(path, LabelSpace({"x", "y", "z"})));
  std::filesystem::remove(path);
}

DiagnosisConfig small_config() {
  DiagnosisConfig cfg = DiagnosisConfig::desk();
  cfg.input_size = 32;
  cfg.conv_channels = {4, 4, 8, 8, 8, 8, 8, 8};
  cfg.fc_width = 16;
  cfg.classes = 2;
  cfg.batch_size = 8;
  cfg.epochs = 12;
  cfg.seed = 3;
  return cfg;
}

TEST(Training, LearnsToSeparateTwoTextures) {
  SynthConfig sc;
  sc.classes = 2;
  sc.per_class = 40;
  sc.size = 32;
  sc.periods = {3.0, 9.0};
  std::vector<int> classes;
  const auto images = synth_images(sc, &classes);
  const auto space = LabelSpace::synthetic(2);
  std::vector<LabelSet> labels;
  for (int c : classes) labels.push_back({space.name(c)});

  DiagnosisConfig cfg = small_config();
  cfg.epochs = 25;
  cfg.optimizer.learning_rate = 3e-3;
  Classifier<float> model(cfg, 4);
  const auto fit = fit_diagnosis(model, images, labels, space, cfg);
  EXPECT_LT(fit.history.epoch_loss.back(), fit.history.epoch_loss.front());
  EXPECT_EQ(fit.train_count + fit.validation_count, images.size());
  EXPECT_GE(subset_accuracy(predict_all(model, images, fit.thresholds, space), labels), 0.75);
}

TEST(Training, IsDeterministicForASeed) {
  SynthConfig sc;
  sc.classes = 2;
  sc.per_class = 4;
  sc.size = 32;
  std::vector<int> classes;
  const auto images = synth_images(sc, &classes);
  Matrix targets;
  for (int c : classes) targets.push_back(c == 0 ? std::vector<double>{1, 0} : std::vector<double>{0, 1});
  DiagnosisConfig cfg = small_config();
  cfg.epochs = 2;
  Classifier<float> a(cfg, 5), b(cfg, 5);
  train_classifier(a, std::span<const ImageTensor>(images), targets, cfg);
  train_classifier(b, std::span<const ImageTensor>(images), targets, cfg);
  EXPECT_EQ(encode_archive(a.to_params()), encode_archive(b.to_params()));
}

TEST(Training, RejectsWrongInputSize) {
  Classifier<float> model(small_config(), 4);
  const std::vector<ImageTensor> images(2, ImageTensor(24, 24, 3, 0.5));
  const Matrix targets(2, std::vector<double>{1, 0});
  EXPECT_ANY_THROW(train_classifier(model, std::span<const ImageTensor>(images), targets, small_config()));
}

}  // namespace
