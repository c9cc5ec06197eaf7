#include "srdiag/imaging/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srdiag/error.hpp"

namespace srdiag {

double cubic_kernel(double x) {
  constexpr double a = kBicubicA;
  const double t = std::abs(x);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

ResamplePlan::ResamplePlan(int source_size, int target_size)
    : source_(source_size), target_(target_size) {
  if (source_size < 1) throw InvalidArgument("ResamplePlan: source size must be >= 1");
  if (target_size < 1) {
    throw InvalidArgument("ResamplePlan: target size must be >= 1, got " + std::to_string(target_size));
  }
  const double scale = static_cast<double>(source_size) / target_size;
  const double stretch = std::max(scale, 1.0);
  const double support = 2.0 * stretch;
  taps_.resize(target_size);
  for (int i = 0; i < target_size; ++i) {
    const double center = (i + 0.5) * scale - 0.5;
    const int first = static_cast<int>(std::floor(center - support));
    const int last = static_cast<int>(std::ceil(center + support));
    ResampleTap& tap = taps_[i];
    tap.first = first;
    tap.weights.resize(last - first + 1);
    double sum = 0.0;
    for (int j = first; j <= last; ++j) {
      const double w = cubic_kernel((center - j) / stretch);
      tap.weights[j - first] = w;
      sum += w;
    }
    for (double& w : tap.weights) w /= sum;
  }
}

int ResamplePlan::source_index(int out, int k) const {
  return std::clamp(taps_[out].first + k, 0, source_ - 1);
}

ImageTensor bicubic_resize(const ImageTensor& img, int target_h, int target_w) {
  if (target_h < 1 || target_w < 1) {
    throw InvalidArgument("bicubic_resize: target dims must be >= 1, got " + std::to_string(target_h) +
                          "x" + std::to_string(target_w));
  }
  if (img.empty()) throw InvalidArgument("bicubic_resize: empty input image");
  const int h = img.height();
  const int w = img.width();
  const int c = img.channels();
  const ResamplePlan plan_x(w, target_w);
  const ResamplePlan plan_y(h, target_h);

  // Horizontal pass: h x target_w.
  std::vector<double> tmp(static_cast<std::size_t>(h) * target_w * c, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < target_w; ++x) {
      const ResampleTap& tap = plan_x.tap(x);
      double* out = &tmp[(static_cast<std::size_t>(y) * target_w + x) * c];
      for (std::size_t k = 0; k < tap.weights.size(); ++k) {
        const int sx = plan_x.source_index(x, static_cast<int>(k));
        const double wk = tap.weights[k];
        for (int ch = 0; ch < c; ++ch) out[ch] += wk * img.at(y, sx, ch);
      }
    }
  }

  ImageTensor result(target_h, target_w, c);
  for (int y = 0; y < target_h; ++y) {
    const ResampleTap& tap = plan_y.tap(y);
    for (std::size_t k = 0; k < tap.weights.size(); ++k) {
      const int sy = plan_y.source_index(y, static_cast<int>(k));
      const double wk = tap.weights[k];
      const double* row = &tmp[static_cast<std::size_t>(sy) * target_w * c];
      for (int x = 0; x < target_w; ++x) {
        for (int ch = 0; ch < c; ++ch) result.at(y, x, ch) += wk * row[x * c + ch];
      }
    }
  }
  result.clamp01();
  return result;
}

}  // namespace srdiag
