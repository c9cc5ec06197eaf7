#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "srdiag/error.hpp"
#include "srdiag/imaging/png.hpp"
#include "srdiag/imaging/psnr.hpp"
#include "srdiag/imaging/resample.hpp"
#include "srdiag/imaging/transforms.hpp"

using namespace srdiag;
using srdiag::testing::random_image;

namespace {

TEST(CubicKernel, KnownValues) {
  EXPECT_DOUBLE_EQ(cubic_kernel(0.0), 1.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(1.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(2.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(0.5), 0.5625);
  EXPECT_DOUBLE_EQ(cubic_kernel(-1.5), -0.0625);
  for (double x = -2.5; x <= 2.5; x += 0.125) EXPECT_DOUBLE_EQ(cubic_kernel(x), srdiag::testing::keys_kernel(x));
}

TEST(CubicKernel, IntegerShiftsPartitionUnity) {
  for (double f = 0.0; f < 1.0; f += 0.0625) {
    double sum = 0;
    for (int k = -3; k <= 3; ++k) sum += cubic_kernel(f + k);
    EXPECT_NEAR(sum, 1.0, 1e-14);
  }
}

TEST(Bicubic, SameSizeIsIdentity) {
  Rng rng(1);
  const auto img = random_image(rng, 9, 7, 3);
  const auto out = bicubic_resize(img, 9, 7);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(out.data()[i], img.data()[i], 1e-12);
}

TEST(Bicubic, MatchesDirectConvolution) {
  Rng rng(2);
  for (auto [h, w, th, tw] : std::vector<std::array<int, 4>>{{224, 224, 56, 56}, {56, 56, 224, 224}, {17, 23, 5, 40}}) {
    const auto img = random_image(rng, h, w, 3);
    const auto a = bicubic_resize(img, th, tw);
    const auto b = srdiag::testing::direct_bicubic(img, th, tw);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a.data()[i], b.data()[i], 1e-9);
  }
}

TEST(Bicubic, OutputIsClampedAndShaped) {
  ImageTensor step(8, 8, 1, 0.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 4; x < 8; ++x) step.at(y, x, 0) = 1.0;
  const auto up = bicubic_resize(step, 32, 24);
  EXPECT_EQ(up.height(), 32);
  EXPECT_EQ(up.width(), 24);
  for (double v : up.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_THROW(bicubic_resize(step, 0, 4), InvalidArgument);
}

TEST(Bicubic, DownscaleAttenuatesFineStripes) {
  ImageTensor stripes(64, 64, 1);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) stripes.at(y, x, 0) = 0.5 + 0.4 * ((x % 2) ? 1 : -1);
  const auto small = bicubic_resize(stripes, 16, 16);
  for (double v : small.data()) EXPECT_NEAR(v, 0.5, 0.2 * 0.4);
}

TEST(Psnr, KnownValues) {
  const ImageTensor a(4, 4, 3, 0.5);
  ImageTensor b(4, 4, 3, 0.6);
  EXPECT_NEAR(mean_squared_error(a, b), 0.01, 1e-15);
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  EXPECT_THROW(psnr(a, ImageTensor(4, 5, 3)), InvalidArgument);
}

TEST(Png, RoundTripsEightBitValues) {
  const auto dir = std::filesystem::temp_directory_path();
  for (int channels : {1, 3}) {
    ImageTensor img(5, 7, channels);
    int k = 0;
    for (double& v : img.data()) v = (k++ * 37 % 256) / 255.0;
    const auto path = dir / ("srdiag_png_test_" + std::to_string(channels) + ".png");
    write_png(path, img);
    const auto back = read_png(path);
    ASSERT_TRUE(back.same_shape(img));
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back.data()[i], img.data()[i], 1e-12);
    std::filesystem::remove(path);
  }
}

TEST(Png, MissingOrCorruptFilesAreIoErrors) {
  EXPECT_THROW(read_png("/nonexistent/file.png"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "srdiag_png_test_bad.png";
  write_file_bytes(path, "not a png");
  EXPECT_THROW(read_png(path), IoError);
  std::filesystem::remove(path);
}

TEST(Transforms, RotationsAndFlipsFormAGroup) {
  Rng rng(3);
  const auto img = random_image(rng, 4, 6, 3);
  EXPECT_EQ(rotate90(img, 4), img);
  EXPECT_EQ(rotate90(rotate90(img, 1), 3), img);
  EXPECT_EQ(flip_horizontal(flip_horizontal(img)), img);
  const auto r = rotate90(img, 1);
  EXPECT_EQ(r.height(), 6);
  EXPECT_EQ(r.width(), 4);
}

TEST(Transforms, CropAndRandomCrop) {
  Rng rng(4);
  const auto img = random_image(rng, 10, 12, 1);
  const auto c = crop(img, 2, 3, 4);
  EXPECT_EQ(c.at(0, 0, 0), img.at(2, 3, 0));
  EXPECT_EQ(c.at(3, 3, 0), img.at(5, 6, 0));
  EXPECT_THROW(crop(img, 8, 0, 4), InvalidArgument);
  Rng a(5), b(5);
  EXPECT_EQ(random_crop(img, 6, a), random_crop(img, 6, b));
  EXPECT_EQ(augment(img, a).size(), img.size());
}

}  // namespace
