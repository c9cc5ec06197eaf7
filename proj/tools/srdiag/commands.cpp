#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <vector>

#include "srdiag/config/run_config.hpp"
#include "srdiag/datasets/manifest.hpp"
#include "srdiag/datasets/synth.hpp"
#include "srdiag/diagnosis/diagnosis.hpp"
#include "srdiag/error.hpp"
#include "srdiag/evaluation/evaluation.hpp"
#include "srdiag/imaging/png.hpp"
#include "srdiag/log.hpp"
#include "srdiag/losses/feature_extractor.hpp"
#include "srdiag/models/model_files.hpp"
#include "srdiag/training/trainers.hpp"

namespace fs = std::filesystem;

namespace srdiag::cli {

namespace {

struct Split {
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> test;
};

RunConfig load_config(const std::string& path, const std::string& out_override) {
  RunConfig cfg = RunConfig::load(path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (cfg.deterministic) set_threads(1);
  return cfg;
}

Split load_split(const RunConfig& cfg) {
  if (cfg.data.manifest.empty()) throw ConfigError("data.manifest is not set");
  if (!fs::exists(cfg.data.manifest)) throw ConfigError("manifest not found: " + cfg.data.manifest);
  const auto entries = load_manifest(cfg.data.manifest, cfg.label_space());
  if (entries.size() < 2) throw ConfigError("manifest " + cfg.data.manifest + " needs at least two entries");
  auto [train, test] = split(entries, cfg.data.train_fraction, cfg.stream_seed(SeedStream::kSplit));
  return {std::move(train), std::move(test)};
}

std::vector<ImageTensor> read_images(const std::vector<ManifestEntry>& entries) {
  std::vector<ImageTensor> images;
  images.reserve(entries.size());
  for (const auto& e : entries) images.push_back(read_png(e.path));
  return images;
}

void write_config_snapshot(const RunConfig& cfg, const fs::path& dir, const std::string& name) {
  write_file_bytes(dir / name, cfg.to_json().dump(2) + "\n");
}

}  // namespace

int run_synth(const SynthArgs& args) {
  SynthConfig cfg;
  cfg.classes = args.classes;
  cfg.per_class = args.per_class;
  cfg.size = args.size;
  cfg.seed = args.seed;
  cfg.validate();
  const auto corpus = synth_corpus(cfg, args.out);
  std::cout << "wrote " << corpus.entries.size() << " images in " << cfg.classes << " classes to " << args.out
            << "\nmanifest: " << corpus.manifest.string() << '\n';
  return 0;
}

int run_train_sr(const TrainSrArgs& args) {
  RunConfig cfg = load_config(args.config, args.out);
  if (args.iterations) cfg.pixel_stage.iterations = *args.iterations;
  if (args.epochs) cfg.gan_stage.epochs = *args.epochs;
  cfg.validate();
  const fs::path out = cfg.output_dir;
  const Split split = load_split(cfg);
  TrainOptions options;
  options.checkpoint_dir = out / "checkpoints";

  Generator<float> generator(cfg.generator, cfg.stream_seed(SeedStream::kGenerator));
  if (args.stage == "pixel") {
    if (!args.init_weights.empty()) throw ConfigError("--init-weights applies to the gan stage only");
    std::optional<Checkpoint> resume;
    if (!args.resume.empty()) resume = load_checkpoint(args.resume);
    const auto images = read_images(split.train);
    PixelTrainer trainer(generator, images, cfg.pixel_stage, options);
    if (resume) trainer.restore(*resume);

    fs::create_directories(out);
    write_config_snapshot(cfg, out, "config.pixel.json");
    trainer.run();
    write_archive(out / "g_pix.srt", generator.to_params());
    trainer.save(out / "pixel-final.ckpt");
    trainer.history().write_csv(out / "pixel_history.csv", "iteration");
    std::cout << "pixel stage finished at iteration " << trainer.iteration() << "; weights: " << (out / "g_pix.srt").string()
              << '\n';
    return 0;
  }

  if (cfg.gan_stage.feature_extractor.empty()) {
    throw ConfigError("gan_stage.feature_extractor is not set (a weights file or random:<seed>)");
  }
  std::optional<Checkpoint> resume;
  if (!args.resume.empty()) {
    resume = load_checkpoint(args.resume);
  } else {
    const fs::path init = args.init_weights.empty() ? out / "g_pix.srt" : fs::path(args.init_weights);
    if (!fs::exists(init)) {
      throw ConfigError("the gan stage starts from the pixel-stage generator: run --stage pixel first (expected " +
                        init.string() + ") or pass --init-weights");
    }
    const TensorArchive weights = read_archive(init);
    generator.load_params(weights);
  }
  const auto fx = load_feature_extractor<float>(cfg.gan_stage.feature_extractor);
  Discriminator<float> discriminator(cfg.discriminator, cfg.stream_seed(SeedStream::kDiscriminator));
  const auto images = read_images(split.train);
  GanTrainer trainer(generator, discriminator, fx, images, cfg.gan_stage, options);
  if (resume) trainer.restore(*resume);

  fs::create_directories(out);
  write_config_snapshot(cfg, out, "config.gan.json");
  trainer.run();
  write_archive(out / "g_feat.srt", generator.to_params());
  write_archive(out / "d.srt", discriminator.to_params());
  trainer.save(out / "gan-final.ckpt");
  trainer.history().write_csv(out / "gan_history.csv", "epoch");
  std::cout << "gan stage finished at epoch " << trainer.epoch() << "; weights: " << (out / "g_feat.srt").string() << '\n';
  return 0;
}

int run_train_diag(const TrainDiagArgs& args) {
  RunConfig cfg = load_config(args.config, args.out);
  if (args.epochs) cfg.diagnosis.epochs = *args.epochs;
  cfg.validate();
  const fs::path out = cfg.output_dir;
  const LabelSpace space = cfg.label_space();
  const Split split = load_split(cfg);
  const auto images = read_images(split.train);
  std::vector<LabelSet> labels;
  for (const auto& e : split.train) labels.push_back(e.labels);

  Classifier<float> model(cfg.diagnosis, cfg.stream_seed(SeedStream::kClassifierInit));
  const DiagnosisFit fit = fit_diagnosis(model, images, labels, space, cfg.diagnosis);

  fs::create_directories(out);
  write_config_snapshot(cfg, out, "config.diag.json");
  write_archive(out / "classifier.srt", model.to_params());
  save_thresholds(out / "thresholds.json", fit.thresholds, space);
  LossHistory history;
  history.columns = {"bce"};
  for (std::size_t i = 0; i < fit.history.epoch_loss.size(); ++i) {
    history.append(static_cast<std::int64_t>(i + 1), {fit.history.epoch_loss[i]});
  }
  history.write_csv(out / "diag_history.csv", "epoch");
  std::printf("trained on %zu images, validated on %zu: validation subset accuracy %.4f\n", fit.train_count,
              fit.validation_count, fit.validation_accuracy);
  return 0;
}

int run_restore(const RestoreArgs& args) {
  PipelineVariant variant = PipelineVariant::bicubic();
  std::unique_ptr<Generator<float>> generator;
  int scale = args.scale;
  if (args.method == "generator") {
    if (args.model.empty()) throw ConfigError("--method generator requires --model");
    generator = std::make_unique<Generator<float>>(load_generator(args.model));
    variant = PipelineVariant::generator("generator", *generator);
    scale = generator->config().upscale;
  }
  std::vector<std::pair<fs::path, fs::path>> jobs;
  if (fs::is_directory(args.in)) {
    for (const auto& e : fs::directory_iterator(args.in)) {
      if (e.is_regular_file() && e.path().extension() == ".png") {
        jobs.emplace_back(e.path(), fs::path(args.out) / e.path().filename());
      }
    }
    std::sort(jobs.begin(), jobs.end());
    if (jobs.empty()) throw ConfigError("no .png files in " + args.in);
  } else {
    jobs.emplace_back(args.in, args.out);
  }
  for (const auto& [in, out] : jobs) {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    const ImageTensor lr = read_png(in);
    write_png(out, restore(variant, lr, scale));
  }
  std::cout << "restored " << jobs.size() << " image(s) with " << args.method << '\n';
  return 0;
}

int run_evaluate(const EvaluateArgs& args) {
  RunConfig cfg = load_config(args.config, "");
  const LabelSpace space = cfg.label_space();
  const Split split = load_split(cfg);
  Classifier<float> classifier = load_classifier(args.classifier);
  if (classifier.config().classes != space.size()) {
    throw ConfigError("classifier has " + std::to_string(classifier.config().classes) +
                      " outputs but the label space has " + std::to_string(space.size()));
  }
  const ThresholdVector thresholds = load_thresholds(args.thresholds, space);
  std::optional<Generator<float>> gpix, gfeat;
  if (!args.gpix.empty()) gpix.emplace(load_generator(args.gpix));
  if (!args.gfeat.empty()) gfeat.emplace(load_generator(args.gfeat));

  std::vector<PipelineVariant> variants{PipelineVariant::bicubic()};
  if (gpix) variants.push_back(PipelineVariant::generator(kVariantGPix, *gpix));
  if (gfeat) variants.push_back(PipelineVariant::generator(kVariantGFeat, *gfeat));
  variants.push_back(PipelineVariant::original());

  const DegradedSet testset = degrade_testset(split.test, cfg.evaluation.lr_size);
  const MetricsTable table =
      compare_pipelines(classifier, thresholds, space, variants, testset, cfg.evaluation.contact_rows);
  fs::create_directories(args.out);
  export_report(table, args.out, cfg.evaluation.contact_rows, cfg.evaluation.contact_crop);
  if (!table.skipped.empty()) {
    std::string text = "source,reason\n";
    for (const auto& s : table.skipped) text += s.source + ",\"" + s.reason + "\"\n";
    write_file_bytes(fs::path(args.out) / "skipped.csv", text);
  }
  std::printf("%-10s %9s %10s %6s\n", "variant", "accuracy", "psnr_db", "n");
  for (const auto& r : table.rows) {
    if (r.mean_psnr) {
      std::printf("%-10s %9.4f %10.3f %6zu\n", r.variant.c_str(), r.accuracy, *r.mean_psnr, r.n);
    } else {
      std::printf("%-10s %9.4f %10s %6zu\n", r.variant.c_str(), r.accuracy, "-", r.n);
    }
  }
  if (!table.skipped.empty()) std::printf("skipped %zu unreadable item(s)\n", table.skipped.size());
  return 0;
}

}  // namespace srdiag::cli
