#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srdiag/datasets/pairs.hpp"
#include "srdiag/losses/losses.hpp"
#include "srdiag/models/discriminator.hpp"
#include "srdiag/models/generator.hpp"
#include "srdiag/nn/adam.hpp"
#include "srdiag/training/checkpoint.hpp"

namespace srdiag {

struct PixelStageConfig {
  int crop = 96;
  int batch_size = 64;
  std::int64_t iterations = 1'000'000;
  nn::AdamConfig optimizer{2e-4, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 0;
  std::int64_t log_interval = 100;
  std::int64_t checkpoint_interval = 0;  // 0 disables periodic checkpoints

  static PixelStageConfig desk();
  void validate() const;
  /// Fields that shape the trajectory (everything but the run length and I/O intervals).
  nlohmann::json trajectory() const;
  bool operator==(const PixelStageConfig&) const = default;
};

struct GanStageConfig {
  int crop = 192;
  int batch_size = 32;
  std::int64_t epochs = 400;
  LossWeights weights;
  nn::AdamConfig g_optimizer{1e-4, 0.9, 0.999, 1e-8};
  nn::AdamConfig d_optimizer{1e-4, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 0;
  std::string feature_extractor;  // "random:<seed>[:<width>]" or a file path (relative to the config file)
  std::int64_t log_interval = 100;
  std::int64_t checkpoint_interval = 0;  // in steps

  static GanStageConfig desk();
  void validate() const;
  nlohmann::json trajectory() const;
  bool operator==(const GanStageConfig&) const = default;
};

void to_json(nlohmann::json& j, const PixelStageConfig& c);
void from_json(const nlohmann::json& j, PixelStageConfig& c);
void to_json(nlohmann::json& j, const GanStageConfig& c);
void from_json(const nlohmann::json& j, GanStageConfig& c);

struct TrainOptions {
  std::filesystem::path checkpoint_dir;  // empty: no checkpoint files
  /// Called after every step; returning false stops the run early (after the step).
  std::function<bool(std::int64_t step)> on_step;
};

/// Drops images smaller than crop (with a warning); throws ConfigError if none remain.
std::vector<ImageTensor> usable_images(const std::vector<ImageTensor>& images, int crop);

/// Pixel-loss pretraining of the generator. Each iteration draws batch_size images uniformly
/// with replacement, crops, augments, degrades, and takes one Adam step on the L1 loss.
class PixelTrainer {
 public:
  static inline const std::vector<std::string> kColumns{"pixel_loss"};

  PixelTrainer(Generator<float>& generator, std::vector<ImageTensor> images, PixelStageConfig config,
               TrainOptions options = {});

  /// Continue until cfg.iterations steps are done (or on_step asks to stop).
  void run();
  /// One optimisation step on a prepared batch; returns the loss. Does not touch counters.
  double step(const SrBatch<float>& batch);

  Checkpoint checkpoint() const;
  /// Restores generator weights, optimizer state, counters, rng and history. The checkpoint's
  /// generator and trajectory configs must equal the live ones (ConfigError names the field).
  void restore(const Checkpoint& checkpoint);
  std::filesystem::path save(const std::filesystem::path& path) const;

  std::int64_t iteration() const noexcept { return iteration_; }
  const LossHistory& history() const noexcept { return history_; }
  const PixelStageConfig& config() const noexcept { return config_; }

 private:
  Generator<float>& generator_;
  std::vector<ImageTensor> images_;
  PixelStageConfig config_;
  TrainOptions options_;
  nn::Adam<float> adam_;
  Rng rng_;
  std::int64_t iteration_ = 0;
  LossHistory history_;
  GeneratorTrace<float> trace_;
};

/// Per-step losses of the adversarial stage.
struct GanStepLosses {
  double discriminator = 0.0;
  GeneratorLoss generator;
};

/// Adversarial fine-tuning: every step updates D on the relativistic loss, then G on
/// perceptual + lambda * adversarial + eta * pixel, both on the same batch. Epochs are
/// shuffled passes over the images.
class GanTrainer {
 public:
  static inline const std::vector<std::string> kColumns{"d_loss", "perceptual", "g_adversarial", "pixel", "g_total"};

  GanTrainer(Generator<float>& generator, Discriminator<float>& discriminator, const FeatureExtractor<float>& fx,
             std::vector<ImageTensor> images, GanStageConfig config, TrainOptions options = {});

  void run();
  GanStepLosses step(const SrBatch<float>& batch);

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& checkpoint);
  std::filesystem::path save(const std::filesystem::path& path) const;

  std::int64_t iteration() const noexcept { return iteration_; }
  std::int64_t epoch() const noexcept { return epoch_; }
  std::int64_t steps_per_epoch() const noexcept;
  const LossHistory& history() const noexcept { return history_; }

 private:
  nlohmann::json config_snapshot() const;

  Generator<float>& generator_;
  Discriminator<float>& discriminator_;
  const FeatureExtractor<float>& fx_;
  std::vector<ImageTensor> images_;
  GanStageConfig config_;
  TrainOptions options_;
  nn::Adam<float> adam_g_;
  nn::Adam<float> adam_d_;
  Rng rng_;
  std::int64_t iteration_ = 0;
  std::int64_t epoch_ = 0;
  std::int64_t epoch_position_ = 0;
  std::vector<std::uint64_t> epoch_order_;
  std::vector<double> epoch_sums_;
  LossHistory history_;
};

/// Convenience wrappers: run a stage from scratch and return its history.
LossHistory train_pixel_stage(Generator<float>& generator, const std::vector<ImageTensor>& images,
                              const PixelStageConfig& config, const TrainOptions& options = {});
LossHistory train_gan_stage(Generator<float>& generator, Discriminator<float>& discriminator,
                            const FeatureExtractor<float>* fx, const std::vector<ImageTensor>& images,
                            const GanStageConfig& config, const TrainOptions& options = {});

}  // namespace srdiag
