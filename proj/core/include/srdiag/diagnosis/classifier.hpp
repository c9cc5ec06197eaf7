#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "srdiag/io/tensor_archive.hpp"
#include "srdiag/nn/adam.hpp"
#include "srdiag/nn/conv_unit.hpp"

namespace srdiag {

struct DiagnosisConfig {
  static constexpr int kConvLayers = 8;

  int input_size = 224;
  std::vector<int> conv_channels{32, 32, 64, 64, 128, 128, 256, 256};
  int fc_width = 2048;
  double dropout = 0.5;
  int classes = 25;
  nn::AdamConfig optimizer{1e-3, 0.9, 0.999, 1e-8};
  int batch_size = 128;
  int epochs = 30;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;

  /// Reduced widths and batch for single-core runs.
  static DiagnosisConfig desk();

  void validate() const;
  /// The fields that determine the parameter layout.
  nlohmann::json architecture() const;
  bool operator==(const DiagnosisConfig&) const = default;
};

void to_json(nlohmann::json& j, const DiagnosisConfig& c);
void from_json(const nlohmann::json& j, DiagnosisConfig& c);

template <typename T>
struct ClassifierTrace {
  nn::Tensor<T> input;
  std::vector<nn::ConvUnitTrace<T>> units;
  nn::Tensor<T> pooled;
  std::array<nn::Tensor<T>, 2> hidden;             // after ReLU and dropout
  std::array<std::vector<T>, 2> dropout_masks;
  nn::Tensor<T> logits;
};

/// Eight conv -> batch norm -> ReLU units (stride 2 on the second conv of every pair),
/// global average pooling, FC -> ReLU -> dropout twice, then the class logits. Sigmoid
/// probabilities come from probabilities().
template <typename T>
class Classifier {
 public:
  Classifier(const DiagnosisConfig& config, std::uint64_t seed);

  const DiagnosisConfig& config() const noexcept { return config_; }
  int conv_layer_count() const { return static_cast<int>(units_.size()); }
  int fc_layer_count() const { return 3; }

  /// Train mode uses batch statistics and draws dropout masks from rng (required then).
  void forward(const nn::Tensor<T>& x, nn::Mode mode, Rng* rng, ClassifierTrace<T>& trace);
  void backward(ClassifierTrace<T>& trace, const nn::Tensor<T>& g_logits);

  /// Evaluation-mode sigmoid outputs, one row per image.
  std::vector<std::vector<double>> probabilities(const nn::Tensor<T>& x);

  std::vector<nn::ParamRef<T>> parameters();
  std::vector<nn::BufferRef<T>> buffers();
  void zero_grad();

  TensorArchive to_params() const;
  void load_params(const TensorArchive& params);

 private:
  DiagnosisConfig config_;
  std::vector<nn::ConvUnit<T>> units_;
  std::array<nn::Linear<T>, 3> fc_;
};

extern template class Classifier<float>;
extern template class Classifier<double>;

}  // namespace srdiag
