#pragma once

#include <span>
#include <vector>

#include "srdiag/imaging/image.hpp"
#include "srdiag/nn/tensor.hpp"
#include "srdiag/rng.hpp"

namespace srdiag {

struct SamplePair {
  ImageTensor lr;
  ImageTensor hr;
  int scale = 4;
};

/// lr = bicubic_resize(hr, h / scale, w / scale). Dims must be divisible by scale.
SamplePair make_pair(const ImageTensor& hr, int scale);

/// Stack equally sized images into an (N, C, H, W) tensor.
template <typename T>
nn::Tensor<T> to_tensor(std::span<const ImageTensor> images);

template <typename T>
nn::Tensor<T> to_tensor(const ImageTensor& image) {
  return to_tensor<T>(std::span<const ImageTensor>(&image, 1));
}

/// Sample `index` of an (N, C, H, W) tensor as an image (values are not clamped).
template <typename T>
ImageTensor to_image(const nn::Tensor<T>& t, int index);

template <typename T>
struct SrBatch {
  nn::Tensor<T> lr;
  nn::Tensor<T> hr;
};

/// For each listed source image: random crop, augment, make_pair. Rng draws happen in item
/// order (crop offsets, then flip, then rotation) so the batch is a pure function of rng state.
template <typename T>
SrBatch<T> make_sr_batch(const std::vector<ImageTensor>& images, std::span<const std::size_t> indices, int crop,
                         int scale, Rng& rng);

}  // namespace srdiag
