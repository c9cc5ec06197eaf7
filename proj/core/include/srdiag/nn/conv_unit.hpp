#pragma once

#include <optional>
#include <string>
#include <vector>

#include "srdiag/nn/layers.hpp"

namespace srdiag::nn {

/// Activation record of one ConvUnit forward call.
template <typename T>
struct ConvUnitTrace {
  Tensor<T> pre;    // convolution output
  Tensor<T> post;   // after batch norm and activation (aliases `pre` semantics when neither applies)
  BatchNormTrace<T> bn;
};

/// conv -> optional batch norm -> optional leaky ReLU, the building block of the
/// discriminator, the feature extractor and the diagnosis CNN.
template <typename T>
class ConvUnit {
 public:
  ConvUnit() = default;
  ConvUnit(std::string name, int in_channels, int out_channels, int kernel, int stride, int padding,
           bool batch_norm, std::optional<double> activation_slope);

  const std::string& name() const noexcept { return name_; }
  bool has_batch_norm() const noexcept { return bn_.has_value(); }
  const std::optional<double>& activation_slope() const noexcept { return slope_; }

  void init(Rng& rng);

  /// Forward into trace.post (trace.pre keeps the raw convolution output).
  void forward(FeatureView<const T> in, Mode mode, bool update_running, ConvUnitTrace<T>& trace);

  /// g_post is consumed (modified in place). din may be null.
  void backward(FeatureView<const T> in, ConvUnitTrace<T>& trace, Tensor<T>& g_post, Tensor<T>* din,
                bool param_grads);

  void collect(std::vector<ParamRef<T>>& params, std::vector<BufferRef<T>>& buffers);

  Conv2d<T>& conv() noexcept { return conv_; }
  const Conv2d<T>& conv() const noexcept { return conv_; }
  std::optional<BatchNorm2d<T>>& batch_norm() noexcept { return bn_; }

 private:
  std::string name_;
  Conv2d<T> conv_;
  std::optional<BatchNorm2d<T>> bn_;
  std::optional<double> slope_;
};

extern template class ConvUnit<float>;
extern template class ConvUnit<double>;

}  // namespace srdiag::nn
