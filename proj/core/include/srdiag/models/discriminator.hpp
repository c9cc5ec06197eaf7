#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "srdiag/models/generator.hpp"
#include "srdiag/nn/conv_unit.hpp"

namespace srdiag {

struct DiscriminatorConfig {
  static constexpr int kBlocks = 6;

  int input_size = 192;
  std::vector<int> features{64, 128, 256, 512, 512, 512};
  double slope = 0.2;
  int fc_units = 100;
  int channels = 3;

  static DiscriminatorConfig desk();

  /// Exactly six blocks, input divisible by 2^6, positive widths, slope > 0.
  void validate() const;
  int final_extent() const { return input_size >> kBlocks; }
  bool operator==(const DiscriminatorConfig&) const = default;
};

void to_json(nlohmann::json& j, const DiscriminatorConfig& c);
void from_json(const nlohmann::json& j, DiscriminatorConfig& c);

template <typename T>
struct DiscriminatorTrace {
  nn::Tensor<T> input;
  std::vector<nn::ConvUnitTrace<T>> units;
  nn::Tensor<T> hidden;  // FC-100 output after activation
  nn::Tensor<T> logits;  // (N, 1, 1, 1)
};

/// Six conv_blocks (3x3 stride 1, then 4x4 stride 2), LReLU everywhere except the last
/// layer, batch norm on every convolution but the first, then FC-hidden and FC-1.
/// The raw FC-1 output is the critic value C(I); no sigmoid is applied here.
template <typename T>
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& config, std::uint64_t seed);

  const DiscriminatorConfig& config() const noexcept { return config_; }
  std::vector<std::string> conv_layer_names() const;
  int conv_layer_count() const { return static_cast<int>(units_.size()); }

  /// x must be (N, C, input_size, input_size). In train mode batch statistics are used and,
  /// when update_running is set, folded into the running averages.
  void forward(const nn::Tensor<T>& x, nn::Mode mode, bool update_running, DiscriminatorTrace<T>& trace);

  /// Convenience: evaluation-mode logits, one per image.
  std::vector<double> logits(const nn::Tensor<T>& x);

  /// g_logits is (N, 1, 1, 1). Parameter gradients accumulate only when param_grads is set.
  void backward(DiscriminatorTrace<T>& trace, const nn::Tensor<T>& g_logits, nn::Tensor<T>* g_input,
                bool param_grads);

  std::vector<nn::ParamRef<T>> parameters();
  std::vector<nn::BufferRef<T>> buffers();
  void zero_grad();

  ModelParams to_params() const;
  void load_params(const ModelParams& params);

 private:
  DiscriminatorConfig config_;
  std::vector<nn::ConvUnit<T>> units_;
  nn::Linear<T> fc_hidden_;
  nn::Linear<T> fc_out_;
};

extern template class Discriminator<float>;
extern template class Discriminator<double>;

}  // namespace srdiag
