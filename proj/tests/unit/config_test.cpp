#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "srdiag/config/run_config.hpp"
#include "srdiag/error.hpp"
#include "srdiag/io/tensor_archive.hpp"

using namespace srdiag;
using nlohmann::json;

namespace {

std::string config_error(const json& j) {
  try {
    RunConfig::from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(RunConfig, ReferenceDefaults) {
  const RunConfig c = RunConfig::from_json(json::object());
  EXPECT_EQ(c.generator.rrdb_blocks, 23);
  EXPECT_EQ(c.pixel_stage.crop, 96);
  EXPECT_EQ(c.pixel_stage.batch_size, 64);
  EXPECT_EQ(c.gan_stage.crop, 192);
  EXPECT_EQ(c.gan_stage.batch_size, 32);
  EXPECT_EQ(c.gan_stage.weights.lambda, 5e-3);
  EXPECT_EQ(c.gan_stage.weights.eta, 1e-2);
  EXPECT_EQ(c.discriminator.input_size, 192);
  EXPECT_EQ(c.diagnosis.batch_size, 128);
  EXPECT_EQ(c.evaluation.lr_size, 56);
  EXPECT_EQ(c.label_space().size(), 25);
}

TEST(RunConfig, DeskPresetAndOverrides) {
  const RunConfig c = RunConfig::from_json({{"preset", "desk"}, {"pixel_stage", {{"iterations", 17}}}, {"seed", 5}});
  EXPECT_EQ(c.generator.rrdb_blocks, 4);
  EXPECT_EQ(c.pixel_stage.iterations, 17);
  EXPECT_EQ(c.pixel_stage.batch_size, RunConfig::desk().pixel_stage.batch_size);
  EXPECT_EQ(c.label_space().size(), 4);
  EXPECT_EQ(c.pixel_stage.seed, c.stream_seed(SeedStream::kPixelStage));
  EXPECT_NE(config_error({{"preset", "huge"}}), "");
}

TEST(RunConfig, RejectsUnknownKeysAndWrongTypes) {
  EXPECT_NE(config_error({{"pixel_stage", {{"iterationz", 5}}}}).find("iterationz"), std::string::npos);
  EXPECT_NE(config_error({{"bogus", 1}}).find("bogus"), std::string::npos);
  EXPECT_NE(config_error({{"pixel_stage", {{"crop", "big"}}}}).find("crop"), std::string::npos);
  EXPECT_NE(config_error({{"generator", 3}}), "");
}

TEST(RunConfig, CrossChecksSections) {
  EXPECT_NE(config_error({{"preset", "desk"}, {"gan_stage", {{"crop", 128}}}}), "");
  EXPECT_NE(config_error({{"preset", "desk"}, {"evaluation", {{"lr_size", 40}}}}), "");
  EXPECT_NE(config_error({{"preset", "desk"}, {"diagnosis", {{"classes", 7}}}}), "");
  EXPECT_NE(config_error({{"data", {{"train_fraction", 1.5}}}}), "");
}

TEST(RunConfig, StreamSeedsAreDistinctAndExplicitSeedsWin) {
  const RunConfig c = RunConfig::from_json({{"seed", 11}, {"diagnosis", {{"seed", 99}}}});
  std::set<std::uint64_t> seeds;
  for (auto s : {SeedStream::kSplit, SeedStream::kGenerator, SeedStream::kDiscriminator, SeedStream::kPixelStage,
                 SeedStream::kGanStage, SeedStream::kClassifierInit, SeedStream::kDiagnosis}) {
    seeds.insert(c.stream_seed(s));
  }
  EXPECT_EQ(seeds.size(), 7u);
  EXPECT_EQ(c.diagnosis.seed, 99u);
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c = RunConfig::desk();
  c.seed = 3;
  c.data.manifest = "/m.jsonl";
  const RunConfig back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), RunConfig::from_json(c.to_json()).to_json());
  EXPECT_EQ(back.generator, c.generator);
  EXPECT_EQ(back.diagnosis.architecture(), c.diagnosis.architecture());
}

TEST(RunConfig, LoadResolvesManifestRelativeToConfig) {
  const auto dir = std::filesystem::temp_directory_path() / "srdiag_config_test";
  std::filesystem::create_directories(dir);
  write_file_bytes(dir / "run.json",
                   R"({"preset": "desk", "data": {"manifest": "data/m.jsonl"}, "gan_stage": {"feature_extractor": "w/fx.srt"}})");
  const RunConfig c = RunConfig::load(dir / "run.json");
  EXPECT_EQ(std::filesystem::path(c.data.manifest), dir / "data/m.jsonl");
  EXPECT_EQ(std::filesystem::path(c.gan_stage.feature_extractor), dir / "w/fx.srt");
  write_file_bytes(dir / "random.json", R"({"preset": "desk", "gan_stage": {"feature_extractor": "random:3:4"}})");
  EXPECT_EQ(RunConfig::load(dir / "random.json").gan_stage.feature_extractor, "random:3:4");
  write_file_bytes(dir / "bad.json", "{ not json");
  EXPECT_ANY_THROW(RunConfig::load(dir / "bad.json"));
  EXPECT_ANY_THROW(RunConfig::load(dir / "absent.json"));
  std::filesystem::remove_all(dir);
}

TEST(RunConfig, ShippedConfigsLoad) {
  const std::filesystem::path configs = SRDIAG_SOURCE_DIR "/configs";
  const RunConfig desk = RunConfig::load(configs / "desk.json");
  EXPECT_EQ(desk.generator, RunConfig::desk().generator);
  const RunConfig reference = RunConfig::load(configs / "reference.json");
  EXPECT_EQ(reference.label_space().size(), 25);
  EXPECT_EQ(reference.generator, GeneratorConfig{});
}

TEST(LabelSpaces, ParseForms) {
  EXPECT_EQ(parse_label_space("cucumber25").size(), 25);
  EXPECT_EQ(parse_label_space("synthetic:6").size(), 6);
  EXPECT_EQ(parse_label_space("list:a,b,c").names(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_THROW(parse_label_space("synthetic:x"), ConfigError);
  EXPECT_THROW(parse_label_space("nope"), ConfigError);
}

}  // namespace
