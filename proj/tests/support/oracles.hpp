#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "srdiag/diagnosis/diagnosis.hpp"
#include "srdiag/imaging/image.hpp"
#include "srdiag/nn/tensor.hpp"
#include "srdiag/rng.hpp"

namespace srdiag::testing {

/// Keys cubic kernel written out from its piecewise definition with a = -0.5.
inline double keys_kernel(double x) {
  const double t = std::fabs(x);
  if (t < 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
  if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
  return 0.0;
}

/// Direct 2-D convolution resize: every output pixel sums kernel(dy) * kernel(dx) * source
/// over the full (clamped) support, then divides by the total weight.
inline ImageTensor direct_bicubic(const ImageTensor& src, int th, int tw) {
  const int h = src.height();
  const int w = src.width();
  const double sy = static_cast<double>(h) / th;
  const double sx = static_cast<double>(w) / tw;
  const double ky = std::max(1.0, sy);
  const double kx = std::max(1.0, sx);
  ImageTensor out(th, tw, src.channels());
  for (int oy = 0; oy < th; ++oy) {
    const double cy = (oy + 0.5) * sy - 0.5;
    for (int ox = 0; ox < tw; ++ox) {
      const double cx = (ox + 0.5) * sx - 0.5;
      for (int ch = 0; ch < src.channels(); ++ch) {
        double acc = 0.0;
        double norm = 0.0;
        for (int iy = static_cast<int>(std::floor(cy - 2 * ky)) - 1; iy <= static_cast<int>(std::ceil(cy + 2 * ky)) + 1; ++iy) {
          const double wy = keys_kernel((iy - cy) / ky);
          if (wy == 0.0) continue;
          for (int ix = static_cast<int>(std::floor(cx - 2 * kx)) - 1; ix <= static_cast<int>(std::ceil(cx + 2 * kx)) + 1;
               ++ix) {
            const double wx = keys_kernel((ix - cx) / kx);
            if (wx == 0.0) continue;
            acc += wy * wx * src.at(std::clamp(iy, 0, h - 1), std::clamp(ix, 0, w - 1), ch);
            norm += wy * wx;
          }
        }
        out.at(oy, ox, ch) = std::clamp(acc / norm, 0.0, 1.0);
      }
    }
  }
  return out;
}

inline ImageTensor random_image(Rng& rng, int h, int w, int c) {
  ImageTensor img(h, w, c);
  for (double& v : img.data()) v = rng.uniform01();
  return img;
}

/// Per class, scan the grid k/20 (k = 1..19) and keep the first threshold with the largest F1,
/// comparing F1 values as exact fractions.
inline ThresholdVector brute_force_thresholds(const Matrix& probs, const Matrix& truth) {
  const std::size_t classes = probs.empty() ? 0 : probs[0].size();
  ThresholdVector best(classes, 0.5);
  for (std::size_t c = 0; c < classes; ++c) {
    long positives = 0;
    for (const auto& row : truth) positives += row[c] > 0.5;
    if (positives == 0) continue;
    long best_num = -1;
    long best_den = 1;
    for (int k = 1; k <= 19; ++k) {
      const double t = k / 20.0;
      long tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool pred = probs[i][c] >= t;
        const bool pos = truth[i][c] > 0.5;
        tp += pred && pos;
        fp += pred && !pos;
        fn += !pred && pos;
      }
      const long num = 2 * tp;
      const long den = 2 * tp + fp + fn;
      if (num * best_den > best_num * den) {
        best_num = num;
        best_den = den;
        best[c] = t;
      }
    }
  }
  return best;
}

/// Direct 7-loop convolution over an NCHW tensor with zero padding.
template <typename T>
nn::Tensor<T> naive_conv2d(const nn::Tensor<T>& x, const nn::Tensor<T>& weight, const nn::Tensor<T>& bias, int stride,
                           int pad) {
  const int k = weight.h();
  const int oh = (x.h() + 2 * pad - k) / stride + 1;
  const int ow = (x.w() + 2 * pad - k) / stride + 1;
  nn::Tensor<T> out({x.n(), weight.n(), oh, ow});
  for (int n = 0; n < x.n(); ++n)
    for (int o = 0; o < weight.n(); ++o)
      for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx) {
          double acc = bias[o];
          for (int i = 0; i < x.c(); ++i)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int sy = y * stride + ky - pad;
                const int sx = xx * stride + kx - pad;
                if (sy < 0 || sx < 0 || sy >= x.h() || sx >= x.w()) continue;
                acc += static_cast<double>(weight(o, i, ky, kx)) * x(n, i, sy, sx);
              }
          out(n, o, y, xx) = static_cast<T>(acc);
        }
  return out;
}

struct GradientAgreement {
  std::size_t agree = 0;
  std::size_t total = 0;
  double worst = 0.0;
  double fraction() const { return total == 0 ? 1.0 : static_cast<double>(agree) / total; }
};

/// Compares analytic[i] with the central difference (f(x+h e_i) - f(x-h e_i)) / 2h for every
/// coordinate. A coordinate agrees when |a - n| <= rel * max(|a|, |n|) + abs_floor.
inline GradientAgreement central_difference_check(std::vector<double>& x, const std::vector<double>& analytic,
                                                  const std::function<double(const std::vector<double>&)>& f,
                                                  double h = 1e-6, double rel = 1e-3, double abs_floor = 1e-9) {
  GradientAgreement g;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double err = std::fabs(analytic[i] - numeric);
    const double scale = std::max(std::fabs(analytic[i]), std::fabs(numeric));
    g.worst = std::max(g.worst, err / std::max(scale, 1e-300));
    g.agree += err <= rel * scale + abs_floor;
    ++g.total;
  }
  return g;
}

}  // namespace srdiag::testing
