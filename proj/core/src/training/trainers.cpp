#include "srdiag/training/trainers.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>

#include "srdiag/error.hpp"
#include "srdiag/io/json_util.hpp"
#include "srdiag/log.hpp"
#include "srdiag/nn/param_io.hpp"

namespace fs = std::filesystem;

namespace srdiag {

using nn::Tensor;

namespace {

enum Stream : std::uint64_t { kPixelStream = 11, kGanStream = 12 };

void check_snapshot(const nlohmann::json& live, const nlohmann::json& saved) {
  if (auto field = first_differing_field(live, saved)) {
    throw ConfigError("checkpoint was written with a different configuration: field '" + *field + "' differs");
  }
}

std::string checkpoint_name(const std::string& stage, std::int64_t step) {
  std::ostringstream s;
  s << stage << '-' << std::setfill('0') << std::setw(8) << step << ".ckpt";
  return s.str();
}

void add_prefixed(TensorArchive& dst, const TensorArchive& src, const std::string& prefix) {
  for (const auto& [name, t] : src.tensors) dst.tensors[prefix + name] = t;
}

TensorArchive strip_prefix(const TensorArchive& src, const std::string& prefix) {
  TensorArchive out;
  for (const auto& [name, t] : src.tensors) {
    if (name.rfind(prefix, 0) == 0) out.tensors[name.substr(prefix.size())] = t;
  }
  return out;
}

bool all_finite(const Tensor<float>& t) {
  for (float v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

// ------------------------------------------------------------------ configs

PixelStageConfig PixelStageConfig::desk() {
  PixelStageConfig c;
  c.batch_size = 16;
  c.iterations = 2000;
  return c;
}

void PixelStageConfig::validate() const {
  if (crop < 4 || crop % 4 != 0) throw InvalidArgument("pixel stage: crop must be a positive multiple of 4");
  if (batch_size < 1) throw InvalidArgument("pixel stage: batch size must be >= 1");
  if (iterations < 0) throw InvalidArgument("pixel stage: iterations must be >= 0");
  if (log_interval < 1) throw InvalidArgument("pixel stage: log interval must be >= 1");
  if (checkpoint_interval < 0) throw InvalidArgument("pixel stage: checkpoint interval must be >= 0");
  optimizer.validate();
}

nlohmann::json PixelStageConfig::trajectory() const {
  return {{"crop", crop}, {"batch_size", batch_size}, {"optimizer", optimizer}, {"seed", seed}};
}

GanStageConfig GanStageConfig::desk() {
  GanStageConfig c;
  c.crop = 64;
  c.batch_size = 8;
  c.epochs = 2;
  c.feature_extractor = "random:0:8";
  return c;
}

void GanStageConfig::validate() const {
  if (crop < 64 || crop % 64 != 0) throw InvalidArgument("gan stage: crop must be a positive multiple of 64");
  if (batch_size < 1) throw InvalidArgument("gan stage: batch size must be >= 1");
  if (epochs < 0) throw InvalidArgument("gan stage: epochs must be >= 0");
  if (log_interval < 1) throw InvalidArgument("gan stage: log interval must be >= 1");
  if (checkpoint_interval < 0) throw InvalidArgument("gan stage: checkpoint interval must be >= 0");
  weights.validate();
  g_optimizer.validate();
  d_optimizer.validate();
}

nlohmann::json GanStageConfig::trajectory() const {
  return {{"crop", crop},
          {"batch_size", batch_size},
          {"lambda", weights.lambda},
          {"eta", weights.eta},
          {"g_optimizer", g_optimizer},
          {"d_optimizer", d_optimizer},
          {"seed", seed},
          {"feature_extractor", feature_extractor}};
}

void to_json(nlohmann::json& j, const PixelStageConfig& c) {
  j = c.trajectory();
  j["iterations"] = c.iterations;
  j["log_interval"] = c.log_interval;
  j["checkpoint_interval"] = c.checkpoint_interval;
}

void from_json(const nlohmann::json& j, PixelStageConfig& c) {
  c.crop = j.at("crop").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.optimizer = j.at("optimizer").get<nn::AdamConfig>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.iterations = j.at("iterations").get<std::int64_t>();
  c.log_interval = j.at("log_interval").get<std::int64_t>();
  c.checkpoint_interval = j.at("checkpoint_interval").get<std::int64_t>();
}

void to_json(nlohmann::json& j, const GanStageConfig& c) {
  j = c.trajectory();
  j["epochs"] = c.epochs;
  j["log_interval"] = c.log_interval;
  j["checkpoint_interval"] = c.checkpoint_interval;
}

void from_json(const nlohmann::json& j, GanStageConfig& c) {
  c.crop = j.at("crop").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.weights.lambda = j.at("lambda").get<double>();
  c.weights.eta = j.at("eta").get<double>();
  c.g_optimizer = j.at("g_optimizer").get<nn::AdamConfig>();
  c.d_optimizer = j.at("d_optimizer").get<nn::AdamConfig>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.feature_extractor = j.at("feature_extractor").get<std::string>();
  c.epochs = j.at("epochs").get<std::int64_t>();
  c.log_interval = j.at("log_interval").get<std::int64_t>();
  c.checkpoint_interval = j.at("checkpoint_interval").get<std::int64_t>();
}

std::vector<ImageTensor> usable_images(const std::vector<ImageTensor>& images, int crop) {
  std::vector<ImageTensor> out;
  std::size_t skipped = 0;
  for (const auto& img : images) {
    if (img.height() >= crop && img.width() >= crop) {
      out.push_back(img);
    } else {
      ++skipped;
    }
  }
  if (skipped > 0) {
    log_warning("skipping " + std::to_string(skipped) + " image(s) smaller than the " + std::to_string(crop) +
                "-pixel crop");
  }
  if (out.empty()) {
    throw ConfigError("no training image is at least " + std::to_string(crop) + "x" + std::to_string(crop));
  }
  return out;
}

// ------------------------------------------------------------------ pixel stage

PixelTrainer::PixelTrainer(Generator<float>& generator, std::vector<ImageTensor> images, PixelStageConfig config,
                           TrainOptions options)
    : generator_(generator),
      config_(std::move(config)),
      options_(std::move(options)),
      adam_((config_.validate(), generator.parameters()), config_.optimizer),
      rng_(mix_seed(config_.seed, kPixelStream)) {
  if (config_.crop % generator_.config().upscale != 0) {
    throw InvalidArgument("pixel stage: crop must be divisible by the upscale factor");
  }
  images_ = usable_images(images, config_.crop);
  history_.columns = kColumns;
}

double PixelTrainer::step(const SrBatch<float>& batch) {
  Tensor<float> sr, g;
  generator_.forward(batch.lr, sr, &trace_);
  const double loss = pixel_loss(batch.hr, sr, &g);
  if (!std::isfinite(loss) || !all_finite(sr)) {
    throw DivergenceError("pixel stage: non-finite loss at iteration " + std::to_string(iteration_ + 1));
  }
  generator_.zero_grad();
  generator_.backward(trace_, g);
  adam_.step();
  return loss;
}

void PixelTrainer::run() {
  const std::size_t n = images_.size();
  std::vector<std::size_t> indices(config_.batch_size);
  while (iteration_ < config_.iterations) {
    for (auto& i : indices) i = rng_.uniform_int(n);
    const auto batch = make_sr_batch<float>(images_, indices, config_.crop, generator_.config().upscale, rng_);
    double loss = 0.0;
    try {
      loss = step(batch);
    } catch (const DivergenceError& e) {
      if (options_.checkpoint_dir.empty()) throw;
      const auto path = save(options_.checkpoint_dir / "pixel-diverged.ckpt");
      throw DivergenceError(std::string(e.what()) + "; state saved to " + path.string());
    }
    ++iteration_;
    history_.append(iteration_, {loss});
    if (iteration_ % config_.log_interval == 0) {
      log_info("pixel stage iteration " + std::to_string(iteration_) + "/" + std::to_string(config_.iterations) +
               " loss " + std::to_string(loss));
    }
    if (config_.checkpoint_interval > 0 && iteration_ % config_.checkpoint_interval == 0 &&
        !options_.checkpoint_dir.empty()) {
      save(options_.checkpoint_dir / checkpoint_name("pixel", iteration_));
    }
    if (options_.on_step && !options_.on_step(iteration_)) break;
  }
}

Checkpoint PixelTrainer::checkpoint() const {
  Checkpoint cp;
  cp.stage = "pixel";
  cp.iteration = iteration_;
  cp.rng_state = rng_.serialize();
  cp.config = {{"stage", config_.trajectory()}, {"generator", generator_.config()}};
  cp.history = history_;
  add_prefixed(cp.tensors, generator_.to_params(), "g/");
  export_adam(adam_, cp.tensors, "opt_g/");
  return cp;
}

void PixelTrainer::restore(const Checkpoint& cp) {
  if (cp.stage != "pixel") throw ConfigError("checkpoint belongs to the '" + cp.stage + "' stage, not 'pixel'");
  check_snapshot({{"stage", config_.trajectory()}, {"generator", generator_.config()}}, cp.config);
  TensorArchive g = strip_prefix(cp.tensors, "g/");
  g.metadata["generator_config"] = cp.config.at("generator");
  generator_.load_params(g);
  import_adam(adam_, cp.tensors, "opt_g/");
  rng_ = Rng::deserialize(cp.rng_state);
  iteration_ = cp.iteration;
  history_ = cp.history;
}

fs::path PixelTrainer::save(const fs::path& path) const {
  save_checkpoint(path, checkpoint());
  return path;
}

// ------------------------------------------------------------------ GAN stage

GanTrainer::GanTrainer(Generator<float>& generator, Discriminator<float>& discriminator,
                       const FeatureExtractor<float>& fx, std::vector<ImageTensor> images, GanStageConfig config,
                       TrainOptions options)
    : generator_(generator),
      discriminator_(discriminator),
      fx_(fx),
      config_(std::move(config)),
      options_(std::move(options)),
      adam_g_((config_.validate(), generator.parameters()), config_.g_optimizer),
      adam_d_(discriminator.parameters(), config_.d_optimizer),
      rng_(mix_seed(config_.seed, kGanStream)) {
  if (discriminator_.config().input_size != config_.crop) {
    throw ConfigError("gan stage: discriminator input size " + std::to_string(discriminator_.config().input_size) +
                      " differs from the crop " + std::to_string(config_.crop));
  }
  images_ = usable_images(images, config_.crop);
  history_.columns = kColumns;
}

std::int64_t GanTrainer::steps_per_epoch() const noexcept {
  const auto n = static_cast<std::int64_t>(images_.size());
  return (n + config_.batch_size - 1) / config_.batch_size;
}

GanStepLosses GanTrainer::step(const SrBatch<float>& batch) {
  GanStepLosses out;
  GeneratorTrace<float> g_trace;
  Tensor<float> sr;
  generator_.forward(batch.lr, sr, &g_trace);
  if (!all_finite(sr)) throw DivergenceError("gan stage: generator produced non-finite output");

  auto logits_of = [](const DiscriminatorTrace<float>& tr) {
    return std::vector<double>(tr.logits.values().begin(), tr.logits.values().end());
  };
  auto as_tensor = [](const std::vector<double>& g) {
    Tensor<float> t({static_cast<int>(g.size()), 1, 1, 1});
    for (std::size_t i = 0; i < g.size(); ++i) t.values()[i] = static_cast<float>(g[i]);
    return t;
  };

  // Discriminator update; the generator output is treated as a constant.
  DiscriminatorTrace<float> d_hr, d_sr;
  discriminator_.forward(batch.hr, nn::Mode::kTrain, true, d_hr);
  discriminator_.forward(sr, nn::Mode::kTrain, true, d_sr);
  std::vector<double> g_hr, g_sr;
  out.discriminator = discriminator_loss(logits_of(d_hr), logits_of(d_sr), &g_hr, &g_sr);
  if (!std::isfinite(out.discriminator)) throw DivergenceError("gan stage: non-finite discriminator loss");
  discriminator_.zero_grad();
  discriminator_.backward(d_hr, as_tensor(g_hr), nullptr, true);
  discriminator_.backward(d_sr, as_tensor(g_sr), nullptr, true);
  adam_d_.step();

  // Generator update through the refreshed discriminator, whose parameters stay fixed here.
  discriminator_.forward(batch.hr, nn::Mode::kTrain, false, d_hr);
  discriminator_.forward(sr, nn::Mode::kTrain, false, d_sr);
  GeneratorLossGrads<float> grads;
  out.generator = total_generator_loss(fx_, config_.weights, batch.hr, sr, logits_of(d_hr), logits_of(d_sr), &grads);
  if (!std::isfinite(out.generator.total)) throw DivergenceError("gan stage: non-finite generator loss");
  Tensor<float> g_image;
  discriminator_.backward(d_sr, as_tensor(grads.c_sr), &g_image, false);
  auto gs = grads.sr.values();
  const auto gi = g_image.values();
  for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += gi[i];
  generator_.zero_grad();
  generator_.backward(g_trace, grads.sr);
  adam_g_.step();
  return out;
}

void GanTrainer::run() {
  const std::int64_t per_epoch = steps_per_epoch();
  while (epoch_ < config_.epochs) {
    if (epoch_position_ == 0 && epoch_order_.empty()) {
      epoch_order_.resize(images_.size());
      std::iota(epoch_order_.begin(), epoch_order_.end(), std::uint64_t{0});
      for (std::size_t i = epoch_order_.size(); i > 1; --i) std::swap(epoch_order_[i - 1], epoch_order_[rng_.uniform_int(i)]);
      epoch_sums_.assign(kColumns.size(), 0.0);
    }
    const std::size_t start = static_cast<std::size_t>(epoch_position_) * config_.batch_size;
    const std::size_t count = std::min<std::size_t>(config_.batch_size, epoch_order_.size() - start);
    std::vector<std::size_t> indices(epoch_order_.begin() + start, epoch_order_.begin() + start + count);
    const auto batch = make_sr_batch<float>(images_, indices, config_.crop, generator_.config().upscale, rng_);
    GanStepLosses losses;
    try {
      losses = step(batch);
    } catch (const DivergenceError& e) {
      if (options_.checkpoint_dir.empty()) throw;
      const auto path = save(options_.checkpoint_dir / "gan-diverged.ckpt");
      throw DivergenceError(std::string(e.what()) + "; state saved to " + path.string());
    }
    const std::vector<double> row{losses.discriminator, losses.generator.perceptual, losses.generator.adversarial,
                                  losses.generator.pixel, losses.generator.total};
    for (std::size_t c = 0; c < row.size(); ++c) epoch_sums_[c] += row[c];
    ++iteration_;
    ++epoch_position_;
    if (iteration_ % config_.log_interval == 0) {
      log_info("gan stage step " + std::to_string(iteration_) + " d " + std::to_string(row[0]) + " g " +
               std::to_string(row[4]));
    }
    if (epoch_position_ == per_epoch) {
      std::vector<double> mean(epoch_sums_);
      for (double& v : mean) v /= static_cast<double>(per_epoch);
      ++epoch_;
      history_.append(epoch_, mean);
      epoch_position_ = 0;
      epoch_order_.clear();
      epoch_sums_.clear();
    }
    if (config_.checkpoint_interval > 0 && iteration_ % config_.checkpoint_interval == 0 &&
        !options_.checkpoint_dir.empty()) {
      save(options_.checkpoint_dir / checkpoint_name("gan", iteration_));
    }
    if (options_.on_step && !options_.on_step(iteration_)) break;
  }
}

nlohmann::json GanTrainer::config_snapshot() const {
  return {{"stage", config_.trajectory()},
          {"generator", generator_.config()},
          {"discriminator", discriminator_.config()}};
}

Checkpoint GanTrainer::checkpoint() const {
  Checkpoint cp;
  cp.stage = "gan";
  cp.iteration = iteration_;
  cp.epoch = epoch_;
  cp.epoch_position = epoch_position_;
  cp.epoch_order = epoch_order_;
  cp.epoch_sums = epoch_sums_;
  cp.rng_state = rng_.serialize();
  cp.config = config_snapshot();
  cp.history = history_;
  add_prefixed(cp.tensors, generator_.to_params(), "g/");
  add_prefixed(cp.tensors, discriminator_.to_params(), "d/");
  export_adam(adam_g_, cp.tensors, "opt_g/");
  export_adam(adam_d_, cp.tensors, "opt_d/");
  return cp;
}

void GanTrainer::restore(const Checkpoint& cp) {
  if (cp.stage != "gan") throw ConfigError("checkpoint belongs to the '" + cp.stage + "' stage, not 'gan'");
  check_snapshot(config_snapshot(), cp.config);
  TensorArchive g = strip_prefix(cp.tensors, "g/");
  g.metadata["generator_config"] = cp.config.at("generator");
  generator_.load_params(g);
  TensorArchive d = strip_prefix(cp.tensors, "d/");
  d.metadata["discriminator_config"] = cp.config.at("discriminator");
  discriminator_.load_params(d);
  import_adam(adam_g_, cp.tensors, "opt_g/");
  import_adam(adam_d_, cp.tensors, "opt_d/");
  rng_ = Rng::deserialize(cp.rng_state);
  iteration_ = cp.iteration;
  epoch_ = cp.epoch;
  epoch_position_ = cp.epoch_position;
  epoch_order_ = cp.epoch_order;
  epoch_sums_ = cp.epoch_sums;
  history_ = cp.history;
}

fs::path GanTrainer::save(const fs::path& path) const {
  save_checkpoint(path, checkpoint());
  return path;
}

LossHistory train_pixel_stage(Generator<float>& generator, const std::vector<ImageTensor>& images,
                              const PixelStageConfig& config, const TrainOptions& options) {
  PixelTrainer trainer(generator, images, config, options);
  trainer.run();
  return trainer.history();
}

LossHistory train_gan_stage(Generator<float>& generator, Discriminator<float>& discriminator,
                            const FeatureExtractor<float>* fx, const std::vector<ImageTensor>& images,
                            const GanStageConfig& config, const TrainOptions& options) {
  if (fx == nullptr) throw ConfigError("gan stage requires a feature extractor for the perceptual loss");
  GanTrainer trainer(generator, discriminator, *fx, images, config, options);
  trainer.run();
  return trainer.history();
}

}  // namespace srdiag
