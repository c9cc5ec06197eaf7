#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace srdiag {

/// H x W x C image with interleaved (row-major, channel-last) double samples.
///
/// Decoded images hold values in [0, 1]. Intermediate results may leave that
/// range; anything persisted goes through clamp01() first.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int height, int width, int channels, double fill = 0.0);
  ImageTensor(int height, int width, int channels, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const ImageTensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  /// Clamp every sample to [0, 1] in place; returns *this.
  ImageTensor& clamp01();

  /// Throws InvalidArgument unless dims are positive, channels in {1,3} and every value finite.
  void validate() const;

  bool operator==(const ImageTensor& other) const = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

}  // namespace srdiag
