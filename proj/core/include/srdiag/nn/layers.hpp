#pragma once

#include <string>
#include <vector>

#include "srdiag/nn/param.hpp"
#include "srdiag/nn/tensor.hpp"
#include "srdiag/rng.hpp"

namespace srdiag::nn {

enum class Mode { kTrain, kEval };

/// 2-D convolution (cross-correlation) with square kernel, zero padding.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding);

  int in_channels() const noexcept { return in_; }
  int out_channels() const noexcept { return out_; }
  int kernel() const noexcept { return k_; }
  int stride() const noexcept { return stride_; }
  int padding() const noexcept { return pad_; }
  int output_size(int input) const noexcept { return (input + 2 * pad_ - k_) / stride_ + 1; }

  /// He-normal init truncated at two standard deviations, multiplied by `scale`; zero bias.
  void init(Rng& rng, double scale = 1.0, double negative_slope = 0.0);

  void forward(FeatureView<const T> in, FeatureView<T> out) const;

  /// Accumulates into din (when non-null) and, when param_grads is set, into weight/bias grads.
  void backward(FeatureView<const T> in, FeatureView<const T> dout, const FeatureView<T>* din,
                bool param_grads);

  Param<T> weight;
  Param<T> bias;

 private:
  AlignedVector<T> tap_major_weights() const;
  void forward_shifted(FeatureView<const T> in, FeatureView<T> out) const;
  void backward_shifted(FeatureView<const T> in, FeatureView<const T> dout, const FeatureView<T>* din,
                        bool param_grads);

  int in_ = 0;
  int out_ = 0;
  int k_ = 0;
  int stride_ = 1;
  int pad_ = 0;
};

/// Fully connected layer on (N, in, 1, 1) tensors.
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(int in_features, int out_features);

  int in_features() const noexcept { return in_; }
  int out_features() const noexcept { return out_; }

  void init(Rng& rng, double scale = 1.0, double negative_slope = 0.0);
  void forward(const Tensor<T>& in, Tensor<T>& out) const;
  void backward(const Tensor<T>& in, const Tensor<T>& dout, Tensor<T>* din, bool param_grads);

  Param<T> weight;
  Param<T> bias;

 private:
  int in_ = 0;
  int out_ = 0;
};

/// Saved statistics of one batch-norm forward call.
template <typename T>
struct BatchNormTrace {
  Tensor<T> normalized;       // x_hat
  std::vector<T> inv_std;     // per channel
  bool batch_stats = false;   // true when mini-batch statistics were used
};

/// Per-channel batch normalization. Running statistics follow
/// running = momentum * running + (1 - momentum) * batch.
template <typename T>
class BatchNorm2d {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.9;

  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels);

  int channels() const noexcept { return channels_; }

  /// In train mode uses batch statistics and, if update_running, updates the running averages.
  void forward(FeatureView<const T> in, FeatureView<T> out, Mode mode, bool update_running,
               BatchNormTrace<T>& trace);
  void backward(const BatchNormTrace<T>& trace, FeatureView<const T> dout, FeatureView<T> din,
                bool param_grads);

  Param<T> gamma;
  Param<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;

 private:
  int channels_ = 0;
};

/// In-place leaky ReLU; slope 0 gives a plain ReLU.
template <typename T>
void leaky_relu_inplace(FeatureView<T> x, T slope);

/// Given the activation output y and upstream gradient g (in place), apply the derivative.
template <typename T>
void leaky_relu_backward_inplace(FeatureView<const T> y, FeatureView<T> g, T slope);

template <typename T>
void upsample_nearest2x(FeatureView<const T> in, Tensor<T>& out);

/// Sums each 2x2 block of dout into din (overwrites din).
template <typename T>
void upsample_nearest2x_backward(const Tensor<T>& dout, Tensor<T>& din);

/// 2x2 stride-2 max pooling; argmax stores the flat input offset of each winner.
template <typename T>
void max_pool2x2(const Tensor<T>& in, Tensor<T>& out, std::vector<std::size_t>& argmax);

template <typename T>
void max_pool2x2_backward(const Tensor<T>& dout, const std::vector<std::size_t>& argmax,
                          Shape input_shape, Tensor<T>& din);

/// Mean over each channel plane: (N,C,H,W) -> (N,C,1,1).
template <typename T>
void global_avg_pool(const Tensor<T>& in, Tensor<T>& out);

template <typename T>
void global_avg_pool_backward(const Tensor<T>& dout, Shape input_shape, Tensor<T>& din);

/// Inverted dropout; the mask holds 0 or 1/(1-p).
template <typename T>
void dropout_forward(Tensor<T>& x, double p, Rng& rng, std::vector<T>& mask);

template <typename T>
void dropout_backward(Tensor<T>& g, const std::vector<T>& mask);

}  // namespace srdiag::nn
