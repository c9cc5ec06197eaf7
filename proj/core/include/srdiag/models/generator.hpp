#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srdiag/io/tensor_archive.hpp"
#include "srdiag/nn/layers.hpp"

namespace srdiag {

/// Named tensors plus a config snapshot in the archive metadata.
using ModelParams = TensorArchive;

struct GeneratorConfig {
  int rrdb_blocks = 23;
  int features = 64;
  int growth = 32;
  double residual_scale = 0.2;
  int upscale = 4;
  int channels = 3;

  /// Small configuration used for CPU-scale experiments.
  static GeneratorConfig desk();

  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);

template <typename T>
struct DenseBlockTrace {
  nn::Tensor<T> concat;  // [x0, c1, c2, c3, c4] after activation
  nn::Tensor<T> last;    // raw output of the fifth convolution
};

template <typename T>
struct RrdbTrace {
  DenseBlockTrace<T> dense[3];
  nn::Tensor<T> out;
};

template <typename T>
struct GeneratorTrace {
  nn::Tensor<T> input;
  nn::Tensor<T> first;
  std::vector<RrdbTrace<T>> rrdb;
  nn::Tensor<T> body;      // first + trunk(rrdb output)
  std::vector<nn::Tensor<T>> upsampled;  // nearest-neighbour x2 of the stage input
  std::vector<nn::Tensor<T>> upconv;     // stage conv output after activation
  nn::Tensor<T> hr;        // hr_conv output after activation
  nn::Tensor<T> output;
};

/// RRDB generator: conv_first -> B residual-in-residual dense blocks -> trunk conv
/// (long skip to conv_first) -> log2(upscale) nearest x2 + conv stages -> hr conv -> conv_last.
///
/// Each dense block has five 3x3 convolutions over the concatenation of the block input
/// and all earlier outputs; the first four are followed by LReLU(0.2). A dense block
/// returns x + beta * conv5, and an RRDB returns x + beta * (three chained dense blocks).
template <typename T>
class Generator {
 public:
  static constexpr double kSlope = 0.2;

  Generator(const GeneratorConfig& config, std::uint64_t seed);

  const GeneratorConfig& config() const noexcept { return config_; }

  /// Names of all convolution layers in forward order.
  std::vector<std::string> conv_layer_names() const;
  int conv_layer_count() const { return static_cast<int>(conv_layer_names().size()); }

  /// lr is (N, C, H, W); sr becomes (N, C, s*H, s*W). With a trace, every activation needed
  /// by backward() is kept.
  void forward(const nn::Tensor<T>& lr, nn::Tensor<T>& sr, GeneratorTrace<T>* trace = nullptr) const;

  /// Accumulate parameter gradients for d(loss)/d(sr) = g_sr. Optionally returns d/d(lr).
  void backward(const GeneratorTrace<T>& trace, const nn::Tensor<T>& g_sr, nn::Tensor<T>* g_lr = nullptr);

  std::vector<nn::ParamRef<T>> parameters();
  void zero_grad();

  ModelParams to_params() const;
  /// Throws ConfigError when the snapshot disagrees with this model's config, IoError on tensor mismatch.
  void load_params(const ModelParams& params);

  /// Zero the fifth convolution of every dense block. Each dense block becomes an identity map,
  /// so each RRDB scales its input by 1 + residual_scale.
  void zero_residual_branches();

 private:
  struct DenseBlock {
    nn::Conv2d<T> conv[5];
  };
  struct Rrdb {
    DenseBlock dense[3];
  };

  void dense_forward(const DenseBlock& db, const nn::Tensor<T>& x, DenseBlockTrace<T>& tr) const;
  void rrdb_forward(const Rrdb& block, const nn::Tensor<T>& x, RrdbTrace<T>& tr) const;
  void dense_backward(DenseBlock& db, const DenseBlockTrace<T>& tr, const nn::Tensor<T>& g_out,
                      nn::Tensor<T>& g_in);
  void rrdb_backward(Rrdb& block, const RrdbTrace<T>& tr, const nn::Tensor<T>& g_out, nn::Tensor<T>& g_in);

  GeneratorConfig config_;
  nn::Conv2d<T> conv_first_;
  std::vector<Rrdb> blocks_;
  nn::Conv2d<T> trunk_conv_;
  std::vector<nn::Conv2d<T>> upconvs_;
  nn::Conv2d<T> hr_conv_;
  nn::Conv2d<T> conv_last_;
};

extern template class Generator<float>;
extern template class Generator<double>;

}  // namespace srdiag
