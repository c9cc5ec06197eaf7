#pragma once

#include <algorithm>
#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace srdiag::nn {

/// Cache-line aligned storage, so vectorized kernels see the same alignment on every run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense NCHW shape. Vectors use h = w = 1.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 1;
  int w = 1;

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t sample_size() const noexcept { return static_cast<std::size_t>(c) * h * w; }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0}) : shape_(shape), data_(shape.count(), fill) {}
  Tensor(Shape shape, const std::vector<T>& values);

  const Shape& shape() const noexcept { return shape_; }
  int n() const noexcept { return shape_.n; }
  int c() const noexcept { return shape_.c; }
  int h() const noexcept { return shape_.h; }
  int w() const noexcept { return shape_.w; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T* sample(int i) noexcept { return data_.data() + i * shape_.sample_size(); }
  const T* sample(int i) const noexcept { return data_.data() + i * shape_.sample_size(); }

  T& operator()(int n, int c, int y, int x) noexcept { return data_[offset(n, c, y, x)]; }
  T operator()(int n, int c, int y, int x) const noexcept { return data_[offset(n, c, y, x)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  T operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T{0}); }

  /// Reallocate only when the shape changes; contents are unspecified afterwards.
  void reshape_to(Shape shape);

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t offset(int n, int c, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  Shape shape_;
  AlignedVector<T> data_;
};

/// Non-owning view of a batch whose samples may be a channel prefix of a wider buffer
/// (used by the dense blocks, which grow their input by concatenation in place).
template <typename T>
struct FeatureView {
  T* data = nullptr;
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::size_t sample_stride = 0;

  T* sample(int i) const noexcept { return data + i * sample_stride; }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
};

template <typename T>
FeatureView<T> view(Tensor<T>& t) {
  return {t.data(), t.n(), t.c(), t.h(), t.w(), t.shape().sample_size()};
}

template <typename T>
FeatureView<const T> view(const Tensor<T>& t) {
  return {t.data(), t.n(), t.c(), t.h(), t.w(), t.shape().sample_size()};
}

/// First `channels` channels of every sample of t.
template <typename T>
FeatureView<T> channel_prefix(Tensor<T>& t, int channels) {
  return {t.data(), t.n(), channels, t.h(), t.w(), t.shape().sample_size()};
}

template <typename T>
FeatureView<const T> channel_prefix(const Tensor<T>& t, int channels) {
  return {t.data(), t.n(), channels, t.h(), t.w(), t.shape().sample_size()};
}

/// Channels [first, first + channels) of every sample of t.
template <typename T>
FeatureView<T> channel_slice(Tensor<T>& t, int first, int channels) {
  return {t.data() + static_cast<std::size_t>(first) * t.shape().plane(), t.n(), channels, t.h(), t.w(),
          t.shape().sample_size()};
}

template <typename T>
FeatureView<const T> channel_slice(const Tensor<T>& t, int first, int channels) {
  return {t.data() + static_cast<std::size_t>(first) * t.shape().plane(), t.n(), channels, t.h(), t.w(),
          t.shape().sample_size()};
}

template <typename T>
FeatureView<const T> as_const(const FeatureView<T>& v) {
  return {v.data, v.n, v.c, v.h, v.w, v.sample_stride};
}

/// Copy a view (any strides) into a dense tensor of matching shape.
template <typename T>
void copy_view(FeatureView<const T> src, Tensor<T>& dst) {
  dst.reshape_to({src.n, src.c, src.h, src.w});
  const std::size_t len = static_cast<std::size_t>(src.c) * src.plane();
  for (int i = 0; i < src.n; ++i) std::copy(src.sample(i), src.sample(i) + len, dst.sample(i));
}

/// dst += src over every element of the views.
template <typename T>
void add_into(FeatureView<const T> src, FeatureView<T> dst) {
  const std::size_t len = static_cast<std::size_t>(src.c) * src.plane();
  for (int i = 0; i < src.n; ++i) {
    const T* s = src.sample(i);
    T* d = dst.sample(i);
    for (std::size_t k = 0; k < len; ++k) d[k] += s[k];
  }
}

template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& t) {
  Tensor<To> out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return out;
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace srdiag::nn
