#include "srdiag/datasets/pairs.hpp"

#include <string>

#include "srdiag/error.hpp"
#include "srdiag/imaging/resample.hpp"
#include "srdiag/imaging/transforms.hpp"

namespace srdiag {

SamplePair make_pair(const ImageTensor& hr, int scale) {
  if (scale < 1) throw InvalidArgument("make_pair: scale must be >= 1");
  if (hr.height() % scale != 0 || hr.width() % scale != 0) {
    throw InvalidArgument("make_pair: image " + std::to_string(hr.height()) + "x" + std::to_string(hr.width()) +
                          " is not divisible by scale " + std::to_string(scale));
  }
  return {bicubic_resize(hr, hr.height() / scale, hr.width() / scale), hr, scale};
}

template <typename T>
nn::Tensor<T> to_tensor(std::span<const ImageTensor> images) {
  if (images.empty()) throw InvalidArgument("to_tensor: empty image list");
  const ImageTensor& first = images.front();
  nn::Tensor<T> out({static_cast<int>(images.size()), first.channels(), first.height(), first.width()});
  const std::size_t plane = static_cast<std::size_t>(first.height()) * first.width();
  for (std::size_t n = 0; n < images.size(); ++n) {
    const ImageTensor& img = images[n];
    if (!img.same_shape(first)) throw InvalidArgument("to_tensor: images in a batch must share dimensions");
    const auto src = img.data();
    T* dst = out.sample(static_cast<int>(n));
    const int c_count = img.channels();
    for (std::size_t p = 0; p < plane; ++p)
      for (int c = 0; c < c_count; ++c) dst[c * plane + p] = static_cast<T>(src[p * c_count + c]);
  }
  return out;
}

template <typename T>
ImageTensor to_image(const nn::Tensor<T>& t, int index) {
  if (index < 0 || index >= t.n()) throw InvalidArgument("to_image: index out of range");
  ImageTensor img(t.h(), t.w(), t.c());
  const std::size_t plane = static_cast<std::size_t>(t.h()) * t.w();
  const T* src = t.sample(index);
  auto dst = img.data();
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < t.c(); ++c) dst[p * t.c() + c] = static_cast<double>(src[c * plane + p]);
  return img;
}

template <typename T>
SrBatch<T> make_sr_batch(const std::vector<ImageTensor>& images, std::span<const std::size_t> indices, int crop,
                         int scale, Rng& rng) {
  std::vector<ImageTensor> lr, hr;
  lr.reserve(indices.size());
  hr.reserve(indices.size());
  for (const auto i : indices) {
    SamplePair pair = make_pair(augment(random_crop(images.at(i), crop, rng), rng), scale);
    lr.push_back(std::move(pair.lr));
    hr.push_back(std::move(pair.hr));
  }
  return {to_tensor<T>(lr), to_tensor<T>(hr)};
}

#define SRDIAG_INSTANTIATE_PAIRS(T)                                                                      \
  template nn::Tensor<T> to_tensor<T>(std::span<const ImageTensor>);                                     \
  template ImageTensor to_image<T>(const nn::Tensor<T>&, int);                                           \
  template SrBatch<T> make_sr_batch<T>(const std::vector<ImageTensor>&, std::span<const std::size_t>, int, \
                                       int, Rng&);

SRDIAG_INSTANTIATE_PAIRS(float)
SRDIAG_INSTANTIATE_PAIRS(double)

}  // namespace srdiag
