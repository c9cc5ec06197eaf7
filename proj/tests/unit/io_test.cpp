#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>

#include "srdiag/error.hpp"
#include "srdiag/io/tensor_archive.hpp"
#include "srdiag/rng.hpp"

using namespace srdiag;

namespace {

TensorArchive sample_archive() {
  TensorArchive a;
  a.metadata = {{"model", "x"}, {"n", 3}};
  a.tensors["b.weight"] = {{2, 3}, {1, 2, 3, 4, 5, 6}};
  a.tensors["a.bias"] = {{3}, {-0.0f, std::numeric_limits<float>::denorm_min(), std::numeric_limits<float>::quiet_NaN()}};
  return a;
}

TEST(TensorArchive, RoundTripIsBitExact) {
  const auto a = sample_archive();
  const std::string bytes = encode_archive(a);
  EXPECT_EQ(bytes.substr(0, 8), "SRDTENS1");
  const auto b = decode_archive(bytes);
  EXPECT_EQ(encode_archive(b), bytes);
  const auto& x = a.tensors.at("a.bias").values;
  const auto& y = b.tensors.at("a.bias").values;
  EXPECT_EQ(std::memcmp(x.data(), y.data(), x.size() * sizeof(float)), 0);
  EXPECT_EQ(b.metadata, a.metadata);
}

TEST(TensorArchive, EncodingIsDeterministic) {
  EXPECT_EQ(encode_archive(sample_archive()), encode_archive(sample_archive()));
}

TEST(TensorArchive, CorruptInputIsRejected) {
  const std::string bytes = encode_archive(sample_archive());
  EXPECT_THROW(decode_archive("short"), IoError);
  EXPECT_THROW(decode_archive("XXXXXXXX" + bytes.substr(8)), IoError);
  EXPECT_THROW(decode_archive(bytes.substr(0, bytes.size() - 4)), IoError);
  std::string bad_len = bytes;
  bad_len[8] = '\xff';
  EXPECT_THROW(decode_archive(bad_len), IoError);
}

TEST(TensorArchive, MissingTensorNamesItself) {
  try {
    (void)sample_archive().at("nope");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
}

TEST(TensorArchive, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "srdiag_archive_test.srt";
  write_archive(path, sample_archive());
  EXPECT_EQ(encode_archive(read_archive(path)), encode_archive(sample_archive()));
  std::filesystem::remove(path);
  EXPECT_THROW(read_archive(path), IoError);
}

TEST(Rng, SerializedStateResumesTheStream) {
  Rng a(42);
  for (int i = 0; i < 10; ++i) a.next_u64();
  Rng b = Rng::deserialize(a.serialize());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_ANY_THROW(Rng::deserialize("garbage"));
}

TEST(Rng, UniformIntIsInRangeAndRoughlyUniform) {
  Rng r(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[r.uniform_int(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_THROW(r.uniform_int(0), InvalidArgument);
}

TEST(Rng, NormalHasUnitMoments) {
  Rng r(2);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, MixSeedSeparatesStreams) {
  EXPECT_NE(mix_seed(1, 1), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 1), mix_seed(2, 1));
  EXPECT_EQ(mix_seed(5, 3), mix_seed(5, 3));
}

}  // namespace
