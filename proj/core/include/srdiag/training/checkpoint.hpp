#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srdiag/io/tensor_archive.hpp"
#include "srdiag/nn/adam.hpp"
#include "srdiag/training/history.hpp"

namespace srdiag {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to continue a training run exactly where it stopped.
struct Checkpoint {
  std::string stage;                      // "pixel" or "gan"
  std::int64_t iteration = 0;             // completed optimisation steps
  std::int64_t epoch = 0;                 // completed epochs (gan stage)
  std::int64_t epoch_position = 0;        // batches consumed in the current epoch
  std::vector<std::uint64_t> epoch_order; // sample order of the current epoch
  std::vector<double> epoch_sums;         // running loss sums of the current epoch
  std::string rng_state;
  nlohmann::json config;                  // stage config and model configs
  LossHistory history;
  TensorArchive tensors;                  // "g/", "d/", "opt_g/", "opt_d/" prefixed entries

  bool operator==(const Checkpoint&) const = default;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws IoError for unreadable, corrupt or wrong-version files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Adam moments as "<prefix>m/<param>" and "<prefix>v/<param>" plus the step count in metadata.
template <typename T>
void export_adam(const nn::Adam<T>& adam, TensorArchive& archive, const std::string& prefix);

template <typename T>
void import_adam(nn::Adam<T>& adam, const TensorArchive& archive, const std::string& prefix);

}  // namespace srdiag
