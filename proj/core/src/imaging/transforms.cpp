#include "srdiag/imaging/transforms.hpp"

#include <algorithm>
#include <string>

#include "srdiag/error.hpp"

namespace srdiag {

ImageTensor crop(const ImageTensor& img, int top, int left, int size) {
  if (size < 1 || top < 0 || left < 0 || top + size > img.height() || left + size > img.width()) {
    throw InvalidArgument("crop: window " + std::to_string(size) + " at (" + std::to_string(top) + "," +
                          std::to_string(left) + ") exceeds " + std::to_string(img.height()) + "x" +
                          std::to_string(img.width()) + " image");
  }
  const int c = img.channels();
  ImageTensor out(size, size, c);
  for (int y = 0; y < size; ++y) {
    const double* src = &img.data()[(static_cast<std::size_t>(top + y) * img.width() + left) * c];
    std::copy(src, src + static_cast<std::size_t>(size) * c,
              &out.data()[static_cast<std::size_t>(y) * size * c]);
  }
  return out;
}

ImageTensor random_crop(const ImageTensor& img, int size, Rng& rng) {
  if (size < 1 || size > std::min(img.height(), img.width())) {
    throw InvalidArgument("random_crop: size " + std::to_string(size) + " exceeds image " +
                          std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
  const int top = static_cast<int>(rng.uniform_int(img.height() - size + 1));
  const int left = static_cast<int>(rng.uniform_int(img.width() - size + 1));
  return crop(img, top, left, size);
}

ImageTensor flip_horizontal(const ImageTensor& img) {
  ImageTensor out(img.height(), img.width(), img.channels());
  const int w = img.width();
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(y, w - 1 - x, c);
  return out;
}

ImageTensor rotate90(const ImageTensor& img, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  if (k == 0) return img;
  const int h = img.height();
  const int w = img.width();
  const int ch = img.channels();
  const int oh = (k == 2) ? h : w;
  const int ow = (k == 2) ? w : h;
  ImageTensor out(oh, ow, ch);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      int sy = 0;
      int sx = 0;
      switch (k) {
        case 1:  // counter-clockwise
          sy = x;
          sx = w - 1 - y;
          break;
        case 2:
          sy = h - 1 - y;
          sx = w - 1 - x;
          break;
        default:
          sy = h - 1 - x;
          sx = y;
          break;
      }
      for (int c = 0; c < ch; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

ImageTensor augment(const ImageTensor& img, Rng& rng) {
  const bool flip = rng.bernoulli(0.5);
  const int k = static_cast<int>(rng.uniform_int(4));
  ImageTensor out = flip ? flip_horizontal(img) : img;
  return rotate90(out, k);
}

}  // namespace srdiag
