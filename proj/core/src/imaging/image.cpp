#include "srdiag/imaging/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srdiag/error.hpp"

namespace srdiag {

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 1 || width < 1 || channels < 1) {
    throw InvalidArgument("ImageTensor: dimensions must be positive, got " + std::to_string(height) +
                          "x" + std::to_string(width) + "x" + std::to_string(channels));
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height < 1 || width < 1 || channels < 1) {
    throw InvalidArgument("ImageTensor: dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw InvalidArgument("ImageTensor: data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(height) + "x" + std::to_string(width) +
                          "x" + std::to_string(channels));
  }
}

ImageTensor& ImageTensor::clamp01() {
  for (double& v : data_) v = std::clamp(v, 0.0, 1.0);
  return *this;
}

void ImageTensor::validate() const {
  if (height_ < 1 || width_ < 1) throw InvalidArgument("image has zero size");
  if (channels_ != 1 && channels_ != 3) {
    throw InvalidArgument("image must have 1 or 3 channels, got " + std::to_string(channels_));
  }
  if (data_.size() != static_cast<std::size_t>(height_) * width_ * channels_) {
    throw InvalidArgument("image data length does not match its dimensions");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("image contains a non-finite value");
  }
}

}  // namespace srdiag
