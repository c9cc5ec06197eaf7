#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace srdiag::cli {

struct SynthArgs {
  std::string out = "data/synth";
  int classes = 4;
  int per_class = 100;
  int size = 224;
  std::uint64_t seed = 0;
};

struct TrainSrArgs {
  std::string config;
  std::string stage;
  std::string resume;
  std::string init_weights;
  std::string out;  // overrides output_dir
  std::optional<std::int64_t> iterations;
  std::optional<std::int64_t> epochs;
};

struct TrainDiagArgs {
  std::string config;
  std::string out;
  std::optional<int> epochs;
};

struct RestoreArgs {
  std::string model;
  std::string in;
  std::string out;
  std::string method = "bicubic";
  int scale = 4;
};

struct EvaluateArgs {
  std::string config;
  std::string classifier;
  std::string thresholds;
  std::string gpix;
  std::string gfeat;
  std::string out;
};

int run_synth(const SynthArgs& args);
int run_train_sr(const TrainSrArgs& args);
int run_train_diag(const TrainDiagArgs& args);
int run_restore(const RestoreArgs& args);
int run_evaluate(const EvaluateArgs& args);

}  // namespace srdiag::cli
