#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "srdiag/error.hpp"
#include "srdiag/log.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

int default_threads() {
  if (const char* env = std::getenv("SRDIAG_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "srdiag: ignoring invalid SRDIAG_THREADS='" << env << "'\n";
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace srdiag::cli;

  CLI::App app{"Super-resolution training and diagnosis-pipeline evaluation"};
  app.require_subcommand(1);
  int threads = default_threads();
  bool verbose = false;
  bool quiet = false;
  app.add_option("--threads", threads, "Linear-algebra threads (env SRDIAG_THREADS; deterministic runs use 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "Log per-epoch details");
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic texture corpus and its manifest");
  synth_cmd->add_option("--out", synth.out, "Output directory")->capture_default_str();
  synth_cmd->add_option("--classes", synth.classes, "Number of texture classes (>= 2)")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  synth_cmd->add_option("--per-class", synth.per_class, "Images per class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--size", synth.size, "Image side in pixels")->check(CLI::Range(16, 4096))->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();

  TrainSrArgs train_sr;
  auto* sr_cmd = app.add_subcommand(
      "train-sr",
      "Train the generator: --stage pixel (L1 loss; reference crop 96, batch 64) or --stage gan "
      "(perceptual + adversarial; reference crop 192, batch 32, lambda 5e-3, eta 1e-2)");
  sr_cmd->add_option("--config", train_sr.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sr_cmd->add_option("--stage", train_sr.stage, "Training stage")
      ->required()
      ->check(CLI::IsMember({"pixel", "gan"}));
  sr_cmd->add_option("--resume", train_sr.resume, "Continue from a checkpoint file")->check(CLI::ExistingFile);
  sr_cmd->add_option("--init-weights", train_sr.init_weights,
                     "Generator weights to start the gan stage from (default: <output_dir>/g_pix.srt)")
      ->check(CLI::ExistingFile);
  sr_cmd->add_option("--out", train_sr.out, "Output directory (overrides output_dir)");
  sr_cmd->add_option("--iterations", train_sr.iterations, "Override pixel_stage.iterations")->check(CLI::NonNegativeNumber);
  sr_cmd->add_option("--epochs", train_sr.epochs, "Override gan_stage.epochs")->check(CLI::NonNegativeNumber);

  TrainDiagArgs train_diag;
  auto* diag_cmd = app.add_subcommand(
      "train-diag", "Train the diagnosis classifier (reference batch 128, Adam) and tune per-class thresholds");
  diag_cmd->add_option("--config", train_diag.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  diag_cmd->add_option("--out", train_diag.out, "Output directory (overrides output_dir)");
  diag_cmd->add_option("--epochs", train_diag.epochs, "Override diagnosis.epochs")->check(CLI::NonNegativeNumber);

  RestoreArgs restore;
  auto* restore_cmd = app.add_subcommand("restore", "Upscale PNG images 4x with bicubic or a trained generator");
  restore_cmd->add_option("--in", restore.in, "Input PNG file or directory")->required()->check(CLI::ExistingPath);
  restore_cmd->add_option("--out", restore.out, "Output PNG file or directory")->required();
  restore_cmd->add_option("--method", restore.method, "Restoration method")
      ->check(CLI::IsMember({"bicubic", "generator"}))
      ->capture_default_str();
  restore_cmd->add_option("--model", restore.model, "Generator weights (required for --method generator)")
      ->check(CLI::ExistingFile);
  restore_cmd->add_option("--scale", restore.scale, "Upscaling factor for --method bicubic")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Degrade the test split to evaluation.lr_size (reference 56), restore, classify, report");
  eval_cmd->add_option("--config", evaluate.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--classifier", evaluate.classifier, "Classifier weights")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--thresholds", evaluate.thresholds, "Thresholds file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gpix", evaluate.gpix, "Pixel-stage generator weights")->check(CLI::ExistingFile);
  eval_cmd->add_option("--gfeat", evaluate.gfeat, "GAN-stage generator weights")->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", evaluate.out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  srdiag::set_log_level(quiet ? srdiag::LogLevel::kWarning : verbose ? srdiag::LogLevel::kDebug : srdiag::LogLevel::kInfo);
  srdiag::set_threads(threads);

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*sr_cmd) return run_train_sr(train_sr);
    if (*diag_cmd) return run_train_diag(train_diag);
    if (*restore_cmd) return run_restore(restore);
    if (*eval_cmd) return run_evaluate(evaluate);
  } catch (const srdiag::ConfigError& e) {
    std::cerr << "srdiag: configuration error: " << e.what() << '\n';
    return kUsageError;
  } catch (const srdiag::InvalidArgument& e) {
    std::cerr << "srdiag: invalid argument: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "srdiag: error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
