#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "srdiag/datasets/labels.hpp"
#include "srdiag/datasets/manifest.hpp"
#include "srdiag/datasets/pairs.hpp"
#include "srdiag/datasets/synth.hpp"
#include "srdiag/error.hpp"
#include "srdiag/imaging/png.hpp"
#include "srdiag/imaging/transforms.hpp"
#include "srdiag/io/tensor_archive.hpp"

using namespace srdiag;
namespace fs = std::filesystem;

namespace {

TEST(Labels, Cucumber25HasTwentyFiveDistinctNames) {
  const auto space = LabelSpace::cucumber25();
  EXPECT_EQ(space.size(), 25);
  EXPECT_EQ(std::set<std::string>(space.names().begin(), space.names().end()).size(), 25u);
  EXPECT_THROW(LabelSpace({"a", "a"}), InvalidArgument);
  EXPECT_THROW(LabelSpace(std::vector<std::string>{}), InvalidArgument);
}

TEST(Labels, EncodeDecodeRoundTrip) {
  const auto space = LabelSpace::synthetic(5);
  for (const LabelSet& set : std::vector<LabelSet>{{"class0"}, {"class4", "class1"}, {"class0", "class2", "class3"}}) {
    const auto v = encode_labels(set, space);
    EXPECT_EQ(decode_labels(v, space), canonical_labels(set, space));
  }
  EXPECT_THROW(encode_labels({}, space), InvalidArgument);
  EXPECT_THROW(encode_labels({"class9"}, space), InvalidArgument);
}

TEST(Labels, PerClassThresholdsUseGreaterOrEqual) {
  const auto space = LabelSpace::synthetic(3);
  const std::vector<double> scores{0.3, 0.6, 0.9}, thresholds{0.3, 0.7, 0.95};
  EXPECT_EQ(decode_labels(scores, space, thresholds), (LabelSet{"class0"}));
  EXPECT_TRUE(decode_labels(scores, space, std::vector<double>{1.0, 1.0, 1.0}).empty());
}

TEST(Manifest, ParsesHeaderAndResolvesRelativePaths) {
  const auto space = LabelSpace::synthetic(3);
  const std::string text =
      "{\"version\": 1}\n"
      "\n"
      "{\"path\": \"a/1.png\", \"labels\": [\"class2\", \"class0\"]}\n"
      "{\"path\": \"/abs/2.png\", \"labels\": [\"class1\"]}\n";
  const auto entries = parse_manifest(text, space, "/data/root");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(fs::path(entries[0].path), fs::path("/data/root/a/1.png"));
  EXPECT_EQ(entries[0].labels, (LabelSet{"class0", "class2"}));
  EXPECT_EQ(entries[1].path, "/abs/2.png");
}

void expect_parse_error(const std::string& text, int line, const std::string& fragment) {
  try {
    parse_manifest(text, LabelSpace::synthetic(2), "/r");
    FAIL() << "expected ParseError for: " << text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  const std::string ok = "{\"path\": \"x.png\", \"labels\": [\"class0\"]}\n";
  expect_parse_error(ok + "{not json\n", 2, "");
  expect_parse_error(ok + "{\"labels\": [\"class0\"]}\n", 2, "path");
  expect_parse_error(ok + "{\"path\": \"y.png\"}\n", 2, "labels");
  expect_parse_error(ok + "{\"path\": \"y.png\", \"labels\": []}\n", 2, "");
  expect_parse_error(ok + "{\"path\": \"y.png\", \"labels\": [\"zebra\"]}\n", 2, "zebra");
  expect_parse_error(ok + ok, 2, "x.png");
  expect_parse_error(ok + "{\"version\": 1}\n", 2, "");
}

TEST(Manifest, WriteAndLoadRoundTrip) {
  const auto dir = fs::temp_directory_path() / "srdiag_manifest_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto space = LabelSpace::synthetic(3);
  const std::vector<ManifestEntry> entries{{(dir / "a.png").string(), {"class1"}},
                                           {(dir / "sub" / "b.png").string(), {"class0", "class2"}}};
  write_manifest(dir / "m.jsonl", entries);
  EXPECT_EQ(read_file_bytes(dir / "m.jsonl").find(dir.string()), std::string::npos);
  const auto loaded = load_manifest(dir / "m.jsonl", space);
  ASSERT_EQ(loaded.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(fs::path(loaded[i].path).lexically_normal(), fs::path(entries[i].path).lexically_normal());
    EXPECT_EQ(loaded[i].labels, entries[i].labels);
  }
  EXPECT_THROW(load_manifest(dir / "missing.jsonl", space), IoError);
  fs::remove_all(dir);
}

TEST(Split, SizesMatchRoundedFraction) {
  const auto train = split_indices(48311, 0.75, 3);
  EXPECT_EQ(train.size(), 36233u);
  EXPECT_EQ(48311 - train.size(), 12078u);
  EXPECT_TRUE(std::is_sorted(train.begin(), train.end()));
  EXPECT_EQ(std::set<std::size_t>(train.begin(), train.end()).size(), train.size());
  EXPECT_THROW(split_indices(10, 0.0, 1), InvalidArgument);
  EXPECT_THROW(split_indices(10, 1.0, 1), InvalidArgument);
}

TEST(Split, IsSeededAndPartitions) {
  std::vector<int> items(100);
  std::iota(items.begin(), items.end(), 0);
  const auto [a, b] = split(items, 0.7, 9);
  const auto [c, d] = split(items, 0.7, 9);
  EXPECT_EQ(a, c);
  EXPECT_EQ(b, d);
  EXPECT_NE(split(items, 0.7, 10).first, a);
  std::vector<int> all = a;
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, items);
  EXPECT_THROW(split_indices(10, 1.5, 0), InvalidArgument);
}

TEST(Pairs, LowResolutionIsBicubicDownscale) {
  const ImageTensor hr(16, 12, 3, 0.25);
  const auto p = make_pair(hr, 4);
  EXPECT_EQ(p.lr.height(), 4);
  EXPECT_EQ(p.lr.width(), 3);
  EXPECT_NEAR(p.lr.at(1, 1, 1), 0.25, 1e-12);
  EXPECT_THROW(make_pair(ImageTensor(10, 12, 3), 4), InvalidArgument);
}

TEST(Pairs, TensorConversionRoundTrips) {
  Rng rng(1);
  std::vector<ImageTensor> imgs;
  for (int i = 0; i < 2; ++i) {
    ImageTensor im(3, 4, 3);
    for (double& v : im.data()) v = rng.uniform01();
    imgs.push_back(im);
  }
  const auto t = to_tensor<double>(imgs);
  EXPECT_EQ(t.shape(), (nn::Shape{2, 3, 3, 4}));
  EXPECT_EQ(t(1, 2, 1, 3), imgs[1].at(1, 3, 2));
  EXPECT_EQ(to_image(t, 1), imgs[1]);
}

TEST(Pairs, BatchIsPureFunctionOfRngState) {
  Rng rng(2);
  std::vector<ImageTensor> imgs;
  for (int i = 0; i < 3; ++i) {
    ImageTensor im(40, 40, 3);
    for (double& v : im.data()) v = rng.uniform01();
    imgs.push_back(im);
  }
  const std::vector<std::size_t> idx{2, 0, 2};
  Rng a(5), b(5);
  const auto x = make_sr_batch<float>(imgs, idx, 16, 4, a);
  const auto y = make_sr_batch<float>(imgs, idx, 16, 4, b);
  EXPECT_EQ(x.hr, y.hr);
  EXPECT_EQ(x.lr, y.lr);
  EXPECT_EQ(x.hr.shape(), (nn::Shape{3, 3, 16, 16}));
  EXPECT_EQ(x.lr.shape(), (nn::Shape{3, 3, 4, 4}));
}

TEST(Synth, DeterministicAndSizedPerConfig) {
  SynthConfig cfg;
  cfg.per_class = 3;
  cfg.size = 32;
  cfg.seed = 4;
  std::vector<int> classes;
  const auto a = synth_images(cfg, &classes);
  const auto b = synth_images(cfg);
  ASSERT_EQ(a.size(), 12u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(classes, (std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3}));
  for (const auto& im : a) {
    EXPECT_EQ(im.height(), 32);
    for (double v : im.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  cfg.seed = 5;
  EXPECT_NE(synth_images(cfg), a);
}

TEST(Synth, DefaultPeriodsAreGeometricBetweenSixAndFourteen) {
  const auto p = default_texture_periods(4);
  ASSERT_EQ(p.size(), 4u);
  EXPECT_NEAR(p.front(), 6.0, 1e-12);
  EXPECT_NEAR(p.back(), 14.0, 1e-12);
  EXPECT_NEAR(p[1] / p[0], p[2] / p[1], 1e-12);
  SynthConfig bad;
  bad.classes = 1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Synth, CorpusWritesImagesAndLoadableManifest) {
  const auto dir = fs::temp_directory_path() / "srdiag_synth_test";
  fs::remove_all(dir);
  SynthConfig cfg;
  cfg.classes = 2;
  cfg.per_class = 2;
  cfg.size = 16;
  const auto corpus = synth_corpus(cfg, dir);
  EXPECT_EQ(corpus.entries.size(), 4u);
  const auto loaded = load_manifest(corpus.manifest, corpus.space);
  ASSERT_EQ(loaded.size(), 4u);
  const auto images = synth_images(cfg);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto im = read_png(loaded[i].path);
    EXPECT_EQ(im.height(), 16);
    for (std::size_t k = 0; k < im.size(); ++k) ASSERT_NEAR(im.data()[k], images[i].data()[k], 0.5 / 255 + 1e-12);
  }
  fs::remove_all(dir);
}

}  // namespace
