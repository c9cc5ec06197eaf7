#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "srdiag/datasets/labels.hpp"
#include "srdiag/diagnosis/classifier.hpp"
#include "srdiag/models/discriminator.hpp"
#include "srdiag/models/generator.hpp"
#include "srdiag/training/trainers.hpp"

namespace srdiag {

struct DataConfig {
  std::string manifest;                  // relative paths resolve against the config file's directory
  std::string labels = "synthetic:4";    // "cucumber25", "synthetic:<n>" or "list:a,b,c"
  double train_fraction = 0.75;

  bool operator==(const DataConfig&) const = default;
};

struct EvaluationConfig {
  int lr_size = 56;
  int contact_rows = 4;
  int contact_crop = 64;

  bool operator==(const EvaluationConfig&) const = default;
};

/// Component streams derived from the global seed.
enum class SeedStream : std::uint64_t {
  kSplit = 1,
  kGenerator = 2,
  kDiscriminator = 3,
  kPixelStage = 4,
  kGanStage = 5,
  kClassifierInit = 6,
  kDiagnosis = 7,
};

/// Everything a CLI run needs. JSON sections: data, generator, discriminator, pixel_stage,
/// gan_stage, diagnosis, evaluation; top-level seed, deterministic, output_dir. Fields
/// missing from a file keep their defaults; unknown keys and wrong types are ConfigErrors.
struct RunConfig {
  DataConfig data;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  PixelStageConfig pixel_stage;
  GanStageConfig gan_stage;
  DiagnosisConfig diagnosis;
  EvaluationConfig evaluation;
  std::uint64_t seed = 0;
  bool deterministic = true;
  std::string output_dir = "runs";

  /// Reference-scale values (23 RRDBs, 96/64 pixel stage, 192/32 GAN stage, batch 128 classifier).
  static RunConfig reference();
  /// Single-core desk scale used by the examples and the acceptance run.
  static RunConfig desk();

  /// Defaults come from reference(), or from desk() when the document sets "preset": "desk".
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  /// Throws ConfigError describing the first invalid field.
  void validate() const;

  LabelSpace label_space() const;
  std::uint64_t stream_seed(SeedStream stream) const;
};

LabelSpace parse_label_space(const std::string& spec);

}  // namespace srdiag
