#pragma once

#include <vector>

#include "srdiag/imaging/image.hpp"

namespace srdiag {

/// Keys cubic convolution kernel parameter.
inline constexpr double kBicubicA = -0.5;

/// Keys cubic kernel with a = -0.5 evaluated at signed distance x.
double cubic_kernel(double x);

/// Contribution of the source samples to one output sample along one axis.
struct ResampleTap {
  int first = 0;               ///< index of the first (unclamped) source sample
  std::vector<double> weights; ///< normalized weights, one per consecutive source sample
};

/// One-axis resampling plan: center-aligned mapping, edge clamp.
///
/// When minifying, the kernel is stretched by the inverse scale factor so the
/// filter also acts as an anti-aliasing low-pass.
class ResamplePlan {
 public:
  ResamplePlan(int source_size, int target_size);

  int source_size() const noexcept { return source_; }
  int target_size() const noexcept { return target_; }
  const ResampleTap& tap(int out) const { return taps_[out]; }

  /// Clamped source index for tap position k of output `out`.
  int source_index(int out, int k) const;

 private:
  int source_;
  int target_;
  std::vector<ResampleTap> taps_;
};

/// Separable bicubic resize to target_h x target_w; output is clamped to [0, 1].
ImageTensor bicubic_resize(const ImageTensor& img, int target_h, int target_w);

}  // namespace srdiag
