#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "srdiag/io/tensor_archive.hpp"
#include "srdiag/nn/conv_unit.hpp"

namespace srdiag {

inline constexpr std::array<double, 3> kImageNetMean{0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kImageNetStd{0.229, 0.224, 0.225};

template <typename T>
struct FeatureExtractorTrace {
  nn::Tensor<T> normalized;
  std::vector<nn::ConvUnitTrace<T>> units;
  std::vector<nn::Tensor<T>> pooled;               // output of each pooling stage
  std::vector<std::vector<std::size_t>> argmax;    // winners of each pooling stage
};

/// VGG-19 convolutional stack (blocks of 2, 2, 4, 4, 4 convs at widths w, 2w, 4w, 8w, 8w with
/// 2x2 max pooling between blocks) truncated at conv5_4 before its ReLU. Weights never change
/// after construction, so one instance can be shared by concurrent readers.
template <typename T>
class FeatureExtractor {
 public:
  static constexpr int kMinInput = 32;
  static constexpr std::array<int, 5> kConvsPerBlock{2, 2, 4, 4, 4};

  explicit FeatureExtractor(int base_width = 64);

  /// Deterministic He-initialised weights.
  static FeatureExtractor random(std::uint64_t seed, int base_width = 64);

  /// Weights from an archive with tensors conv{b}_{i}.weight / .bias; extra entries are ignored.
  static FeatureExtractor from_params(const TensorArchive& archive);

  int base_width() const noexcept { return base_width_; }
  int output_channels() const noexcept { return 8 * base_width_; }
  std::vector<std::string> layer_names() const;

  /// Feature map shape for an input shape. Throws InvalidArgument for inputs below 32x32 or
  /// with a channel count other than 3.
  nn::Shape output_shape(nn::Shape input) const;

  void forward(const nn::Tensor<T>& x, nn::Tensor<T>& features, FeatureExtractorTrace<T>* trace = nullptr) const;

  /// Gradient with respect to the input image batch; weights receive nothing.
  void backward(FeatureExtractorTrace<T>& trace, const nn::Tensor<T>& g_features, nn::Tensor<T>& g_input) const;

  TensorArchive to_params() const;

 private:
  int base_width_;
  mutable std::vector<nn::ConvUnit<T>> units_;  // forward/backward without batch norm do not modify them
};

extern template class FeatureExtractor<float>;
extern template class FeatureExtractor<double>;

/// "random:<seed>" or "random:<seed>:<base_width>" builds a random extractor; anything else is
/// read as a tensor archive file.
template <typename T>
FeatureExtractor<T> load_feature_extractor(const std::string& source);

}  // namespace srdiag
