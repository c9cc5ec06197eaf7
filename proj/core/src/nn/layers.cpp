#include "srdiag/nn/layers.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>

#include "srdiag/error.hpp"

namespace srdiag::nn {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using ColMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
template <typename T>
using ColMap = Eigen::Map<ColMatrix<T>>;

double truncated_normal(Rng& rng) {
  double v = rng.normal();
  while (std::abs(v) > 2.0) v = rng.normal();
  return v;
}

template <typename T>
void im2col(const T* in, int c, int h, int w, int k, int s, int p, int ho, int wo, T* cols) {
  const std::size_t plane_out = static_cast<std::size_t>(ho) * wo;
  for (int ch = 0; ch < c; ++ch) {
    const T* src = in + static_cast<std::size_t>(ch) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols + (static_cast<std::size_t>(ch) * k * k + ky * k + kx) * plane_out;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * s - p + ky;
          T* row = dst + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            std::fill(row, row + wo, T{0});
            continue;
          }
          const T* srow = src + static_cast<std::size_t>(iy) * w;
          if (s == 1) {
            const int x0 = kx - p;  // input x of output column 0
            const int lo = std::min(wo, std::max(0, -x0));
            const int hi = std::min(wo, w - x0);
            for (int ox = 0; ox < lo; ++ox) row[ox] = T{0};
            for (int ox = lo; ox < hi; ++ox) row[ox] = srow[ox + x0];
            for (int ox = std::max(hi, lo); ox < wo; ++ox) row[ox] = T{0};
          } else {
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * s - p + kx;
              row[ox] = (ix >= 0 && ix < w) ? srow[ix] : T{0};
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, int c, int h, int w, int k, int s, int p, int ho, int wo, T* out) {
  const std::size_t plane_out = static_cast<std::size_t>(ho) * wo;
  for (int ch = 0; ch < c; ++ch) {
    T* dst = out + static_cast<std::size_t>(ch) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = cols + (static_cast<std::size_t>(ch) * k * k + ky * k + kx) * plane_out;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * s - p + ky;
          if (iy < 0 || iy >= h) continue;
          const T* row = src + static_cast<std::size_t>(oy) * wo;
          T* drow = dst + static_cast<std::size_t>(iy) * w;
          if (s == 1) {
            const int x0 = kx - p;
            const int lo = std::min(wo, std::max(0, -x0));
            const int hi = std::min(wo, w - x0);
            for (int ox = lo; ox < hi; ++ox) drow[ox + x0] += row[ox];
          } else {
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * s - p + kx;
              if (ix >= 0 && ix < w) drow[ix] += row[ox];
            }
          }
        }
      }
    }
  }
}

/// Stride-1 convolution computed as a sum of k*k GEMMs over shifted views of a zero-padded
/// copy of the input. Outputs are produced on a grid of ho x wp (wp = padded width); the
/// wp - wo trailing columns of every row are scratch and never read back.
template <typename T>
struct ShiftedGeometry {
  int c, h, w, k, pad;
  int hp, wp, ho, wo;
  std::size_t plane;   // padded plane size
  std::size_t grid;    // ho * wp
  ShiftedGeometry(int c_, int h_, int w_, int k_, int p_)
      : c(c_), h(h_), w(w_), k(k_), pad(p_), hp(h_ + 2 * p_), wp(w_ + 2 * p_), ho(h_ + 2 * p_ - k_ + 1),
        wo(w_ + 2 * p_ - k_ + 1), plane(static_cast<std::size_t>(hp) * wp),
        grid(static_cast<std::size_t>(ho) * wp) {}
  std::size_t buffer_size() const { return c * plane + k; }
  std::size_t tap_offset(int ky, int kx) const { return static_cast<std::size_t>(ky) * wp + kx; }
};

template <typename T>
T sequential_sum(const T* x, std::size_t n) {
  T acc{0};
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <typename T>
void pad_into(const T* in, const ShiftedGeometry<T>& g, AlignedVector<T>& padded) {
  padded.assign(g.buffer_size(), T{0});
  for (int ch = 0; ch < g.c; ++ch)
    for (int y = 0; y < g.h; ++y)
      std::copy(in + (static_cast<std::size_t>(ch) * g.h + y) * g.w, in + (static_cast<std::size_t>(ch) * g.h + y + 1) * g.w,
                padded.data() + ch * g.plane + static_cast<std::size_t>(y + g.pad) * g.wp + g.pad);
}

template <typename T>
using StridedCol = Eigen::Map<const ColMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using MutableStridedCol = Eigen::Map<ColMatrix<T>, 0, Eigen::OuterStride<>>;

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : weight({out_channels, in_channels, kernel, kernel}, {out_channels, in_channels, kernel, kernel}),
      bias({1, out_channels, 1, 1}, {out_channels}),
      in_(in_channels),
      out_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(padding) {
  if (in_channels < 1 || out_channels < 1 || kernel < 1 || stride < 1 || padding < 0) {
    throw InvalidArgument("Conv2d: invalid geometry");
  }
}

template <typename T>
void Conv2d<T>::init(Rng& rng, double scale, double negative_slope) {
  const double fan_in = static_cast<double>(in_) * k_ * k_;
  const double std = std::sqrt(2.0 / (1.0 + negative_slope * negative_slope)) / std::sqrt(fan_in);
  for (auto& v : weight.value.values()) v = static_cast<T>(truncated_normal(rng) * std * scale);
  bias.value.zero();
  weight.zero_grad();
  bias.zero_grad();
}

template <typename T>
void Conv2d<T>::forward(FeatureView<const T> in, FeatureView<T> out) const {
  if (in.c != in_) {
    throw InvalidArgument("Conv2d: expected " + std::to_string(in_) + " input channels, got " +
                          std::to_string(in.c));
  }
  const int ho = output_size(in.h);
  const int wo = output_size(in.w);
  if (out.c != out_ || out.h != ho || out.w != wo || out.n != in.n) {
    throw InvalidArgument("Conv2d: output view has wrong shape");
  }
  if (stride_ == 1) {
    forward_shifted(in, out);
    return;
  }
  const std::size_t p = static_cast<std::size_t>(ho) * wo;
  const std::size_t kk = static_cast<std::size_t>(in_) * k_ * k_;
  AlignedVector<T> cols(kk * p);
  ConstMatMap<T> wmat(weight.value.data(), out_, kk);
  for (int i = 0; i < in.n; ++i) {
    im2col(in.sample(i), in_, in.h, in.w, k_, stride_, pad_, ho, wo, cols.data());
    ConstMatMap<T> cmat(cols.data(), kk, p);
    // Computed as (P x Co) column-major so the long spatial axis drives the GEMM kernel.
    ColMap<T> omat_t(out.sample(i), p, out_);
    omat_t.noalias() = cmat.transpose() * wmat.transpose();
    for (int o = 0; o < out_; ++o) omat_t.col(o).array() += bias.value[o];
  }
}

template <typename T>
void Conv2d<T>::backward(FeatureView<const T> in, FeatureView<const T> dout, const FeatureView<T>* din,
                         bool param_grads) {
  if (stride_ == 1) {
    backward_shifted(in, dout, din, param_grads);
    return;
  }
  const int ho = dout.h;
  const int wo = dout.w;
  const std::size_t p = static_cast<std::size_t>(ho) * wo;
  const std::size_t kk = static_cast<std::size_t>(in_) * k_ * k_;
  AlignedVector<T> cols(kk * p);
  ConstMatMap<T> wmat(weight.value.data(), out_, kk);
  ColMap<T> gw_t(weight.grad.data(), kk, out_);
  for (int i = 0; i < in.n; ++i) {
    ConstMatMap<T> dmat(dout.sample(i), out_, p);
    if (param_grads) {
      im2col(in.sample(i), in_, in.h, in.w, k_, stride_, pad_, ho, wo, cols.data());
      ConstMatMap<T> cmat(cols.data(), kk, p);
      gw_t.noalias() += cmat * dmat.transpose();
      for (int o = 0; o < out_; ++o) bias.grad[o] += sequential_sum(dout.sample(i) + static_cast<std::size_t>(o) * p, p);
    }
    if (din != nullptr) {
      MatMap<T> cmat(cols.data(), kk, p);
      cmat.noalias() = wmat.transpose() * dmat;
      col2im_add(cols.data(), in_, in.h, in.w, k_, stride_, pad_, ho, wo, din->sample(i));
    }
  }
}

template <typename T>
AlignedVector<T> Conv2d<T>::tap_major_weights() const {
  // wt[tap] is a (in x out) column-major block: wt[tap][o * in + i] = W[o][i][tap].
  const int taps = k_ * k_;
  AlignedVector<T> wt(static_cast<std::size_t>(taps) * in_ * out_);
  for (int o = 0; o < out_; ++o)
    for (int i = 0; i < in_; ++i)
      for (int t = 0; t < taps; ++t)
        wt[(static_cast<std::size_t>(t) * out_ + o) * in_ + i] = weight.value[(static_cast<std::size_t>(o) * in_ + i) * taps + t];
  return wt;
}

template <typename T>
void Conv2d<T>::forward_shifted(FeatureView<const T> in, FeatureView<T> out) const {
  const ShiftedGeometry<T> g(in_, in.h, in.w, k_, pad_);
  const AlignedVector<T> wt = tap_major_weights();
  AlignedVector<T> padded;
  AlignedVector<T> grid(g.grid * out_);
  for (int s = 0; s < in.n; ++s) {
    pad_into(in.sample(s), g, padded);
    ColMap<T> acc(grid.data(), static_cast<Eigen::Index>(g.grid), out_);
    for (int o = 0; o < out_; ++o) acc.col(o).setConstant(bias.value[o]);
    for (int ky = 0; ky < k_; ++ky)
      for (int kx = 0; kx < k_; ++kx) {
        StridedCol<T> x(padded.data() + g.tap_offset(ky, kx), static_cast<Eigen::Index>(g.grid), in_,
                        Eigen::OuterStride<>(static_cast<Eigen::Index>(g.plane)));
        Eigen::Map<const ColMatrix<T>> wm(wt.data() + static_cast<std::size_t>(ky * k_ + kx) * in_ * out_, in_, out_);
        acc.noalias() += x * wm;
      }
    T* dst = out.sample(s);
    for (int o = 0; o < out_; ++o)
      for (int y = 0; y < g.ho; ++y)
        std::copy(grid.data() + o * g.grid + static_cast<std::size_t>(y) * g.wp,
                  grid.data() + o * g.grid + static_cast<std::size_t>(y) * g.wp + g.wo,
                  dst + (static_cast<std::size_t>(o) * g.ho + y) * g.wo);
  }
}

template <typename T>
void Conv2d<T>::backward_shifted(FeatureView<const T> in, FeatureView<const T> dout, const FeatureView<T>* din,
                                 bool param_grads) {
  const ShiftedGeometry<T> g(in_, in.h, in.w, k_, pad_);
  const int taps = k_ * k_;
  const AlignedVector<T> wt = tap_major_weights();
  AlignedVector<T> gwt(param_grads ? static_cast<std::size_t>(taps) * in_ * out_ : 0, T{0});
  AlignedVector<T> padded;
  AlignedVector<T> dgrid(g.grid * out_, T{0});
  AlignedVector<T> dpadded;
  for (int s = 0; s < in.n; ++s) {
    // Upstream gradient laid out on the padded-width grid, zero in the scratch columns.
    const T* src = dout.sample(s);
    for (int o = 0; o < out_; ++o) {
      for (int y = 0; y < g.ho; ++y) {
        T* row = dgrid.data() + o * g.grid + static_cast<std::size_t>(y) * g.wp;
        std::copy(src + (static_cast<std::size_t>(o) * g.ho + y) * g.wo,
                  src + (static_cast<std::size_t>(o) * g.ho + y + 1) * g.wo, row);
      }
    }
    Eigen::Map<const ColMatrix<T>> dg(dgrid.data(), static_cast<Eigen::Index>(g.grid), out_);
    if (param_grads) {
      pad_into(in.sample(s), g, padded);
      for (int o = 0; o < out_; ++o) bias.grad[o] += sequential_sum(dgrid.data() + static_cast<std::size_t>(o) * g.grid, g.grid);
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          StridedCol<T> x(padded.data() + g.tap_offset(ky, kx), static_cast<Eigen::Index>(g.grid), in_,
                          Eigen::OuterStride<>(static_cast<Eigen::Index>(g.plane)));
          ColMap<T> gw(gwt.data() + static_cast<std::size_t>(ky * k_ + kx) * in_ * out_, in_, out_);
          gw.noalias() += x.transpose() * dg;
        }
    }
    if (din != nullptr) {
      dpadded.assign(g.buffer_size(), T{0});
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          MutableStridedCol<T> dx(dpadded.data() + g.tap_offset(ky, kx), static_cast<Eigen::Index>(g.grid), in_,
                                  Eigen::OuterStride<>(static_cast<Eigen::Index>(g.plane)));
          Eigen::Map<const ColMatrix<T>> wm(wt.data() + static_cast<std::size_t>(ky * k_ + kx) * in_ * out_, in_, out_);
          dx.noalias() += dg * wm.transpose();
        }
      T* dst = din->sample(s);
      for (int ch = 0; ch < in_; ++ch)
        for (int y = 0; y < g.h; ++y) {
          const T* row = dpadded.data() + ch * g.plane + static_cast<std::size_t>(y + g.pad) * g.wp + g.pad;
          T* drow = dst + (static_cast<std::size_t>(ch) * g.h + y) * g.w;
          for (int x = 0; x < g.w; ++x) drow[x] += row[x];
        }
    }
  }
  if (param_grads) {
    for (int o = 0; o < out_; ++o)
      for (int i = 0; i < in_; ++i)
        for (int t = 0; t < taps; ++t)
          weight.grad[(static_cast<std::size_t>(o) * in_ + i) * taps + t] += gwt[(static_cast<std::size_t>(t) * out_ + o) * in_ + i];
  }
}

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(int in_features, int out_features)
    : weight({out_features, in_features, 1, 1}, {out_features, in_features}),
      bias({1, out_features, 1, 1}, {out_features}),
      in_(in_features),
      out_(out_features) {
  if (in_features < 1 || out_features < 1) throw InvalidArgument("Linear: invalid geometry");
}

template <typename T>
void Linear<T>::init(Rng& rng, double scale, double negative_slope) {
  const double std = std::sqrt(2.0 / (1.0 + negative_slope * negative_slope)) / std::sqrt(in_);
  for (auto& v : weight.value.values()) v = static_cast<T>(truncated_normal(rng) * std * scale);
  bias.value.zero();
  weight.zero_grad();
  bias.zero_grad();
}

template <typename T>
void Linear<T>::forward(const Tensor<T>& in, Tensor<T>& out) const {
  if (static_cast<int>(in.shape().sample_size()) != in_) {
    throw InvalidArgument("Linear: expected " + std::to_string(in_) + " features, got " +
                          std::to_string(in.shape().sample_size()));
  }
  out.reshape_to({in.n(), out_, 1, 1});
  ConstMatMap<T> x(in.data(), in.n(), in_);
  ConstMatMap<T> wmat(weight.value.data(), out_, in_);
  MatMap<T> y(out.data(), in.n(), out_);
  y.noalias() = x * wmat.transpose();
  for (int i = 0; i < in.n(); ++i)
    for (int o = 0; o < out_; ++o) y(i, o) += bias.value[o];
}

template <typename T>
void Linear<T>::backward(const Tensor<T>& in, const Tensor<T>& dout, Tensor<T>* din, bool param_grads) {
  ConstMatMap<T> x(in.data(), in.n(), in_);
  ConstMatMap<T> dy(dout.data(), in.n(), out_);
  ConstMatMap<T> wmat(weight.value.data(), out_, in_);
  if (param_grads) {
    MatMap<T> gw(weight.grad.data(), out_, in_);
    gw.noalias() += dy.transpose() * x;
    for (int i = 0; i < in.n(); ++i)
      for (int o = 0; o < out_; ++o) bias.grad[o] += dy(i, o);
  }
  if (din != nullptr) {
    din->reshape_to(in.shape());
    MatMap<T> dx(din->data(), in.n(), in_);
    dx.noalias() = dy * wmat;
  }
}

// ---------------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int channels)
    : gamma({1, channels, 1, 1}, {channels}),
      beta({1, channels, 1, 1}, {channels}),
      running_mean({1, channels, 1, 1}, T{0}),
      running_var({1, channels, 1, 1}, T{1}),
      channels_(channels) {
  gamma.value.fill(T{1});
}

template <typename T>
void BatchNorm2d<T>::forward(FeatureView<const T> in, FeatureView<T> out, Mode mode, bool update_running,
                             BatchNormTrace<T>& trace) {
  if (in.c != channels_) throw InvalidArgument("BatchNorm2d: channel mismatch");
  const std::size_t plane = in.plane();
  const double m = static_cast<double>(in.n) * plane;
  trace.normalized.reshape_to({in.n, in.c, in.h, in.w});
  trace.inv_std.assign(channels_, T{0});
  trace.batch_stats = (mode == Mode::kTrain);
  for (int c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::kTrain) {
      for (int i = 0; i < in.n; ++i) {
        const T* x = in.sample(i) + c * plane;
        for (std::size_t k = 0; k < plane; ++k) mean += x[k];
      }
      mean /= m;
      for (int i = 0; i < in.n; ++i) {
        const T* x = in.sample(i) + c * plane;
        for (std::size_t k = 0; k < plane; ++k) {
          const double d = x[k] - mean;
          var += d * d;
        }
      }
      var /= m;
      if (update_running) {
        const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
        running_mean[c] = static_cast<T>(kMomentum * running_mean[c] + (1.0 - kMomentum) * mean);
        running_var[c] = static_cast<T>(kMomentum * running_var[c] + (1.0 - kMomentum) * unbiased);
      }
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const T inv_std = static_cast<T>(1.0 / std::sqrt(var + kEpsilon));
    trace.inv_std[c] = inv_std;
    const T g = gamma.value[c];
    const T b = beta.value[c];
    const T mu = static_cast<T>(mean);
    for (int i = 0; i < in.n; ++i) {
      const T* x = in.sample(i) + c * plane;
      T* y = out.sample(i) + c * plane;
      T* xh = trace.normalized.sample(i) + c * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        xh[k] = (x[k] - mu) * inv_std;
        y[k] = g * xh[k] + b;
      }
    }
  }
}

template <typename T>
void BatchNorm2d<T>::backward(const BatchNormTrace<T>& trace, FeatureView<const T> dout, FeatureView<T> din,
                              bool param_grads) {
  const std::size_t plane = dout.plane();
  const double m = static_cast<double>(dout.n) * plane;
  for (int c = 0; c < channels_; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xh = 0.0;
    for (int i = 0; i < dout.n; ++i) {
      const T* dy = dout.sample(i) + c * plane;
      const T* xh = trace.normalized.sample(i) + c * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        sum_dy += dy[k];
        sum_dy_xh += static_cast<double>(dy[k]) * xh[k];
      }
    }
    if (param_grads) {
      gamma.grad[c] += static_cast<T>(sum_dy_xh);
      beta.grad[c] += static_cast<T>(sum_dy);
    }
    const T scale = gamma.value[c] * trace.inv_std[c];
    const T mean_dy = static_cast<T>(sum_dy / m);
    const T mean_dy_xh = static_cast<T>(sum_dy_xh / m);
    for (int i = 0; i < dout.n; ++i) {
      const T* dy = dout.sample(i) + c * plane;
      const T* xh = trace.normalized.sample(i) + c * plane;
      T* dx = din.sample(i) + c * plane;
      if (trace.batch_stats) {
        for (std::size_t k = 0; k < plane; ++k) dx[k] = scale * (dy[k] - mean_dy - xh[k] * mean_dy_xh);
      } else {
        for (std::size_t k = 0; k < plane; ++k) dx[k] = scale * dy[k];
      }
    }
  }
}

// ---------------------------------------------------------------- pointwise and resampling

template <typename T>
void leaky_relu_inplace(FeatureView<T> x, T slope) {
  const std::size_t len = static_cast<std::size_t>(x.c) * x.plane();
  for (int i = 0; i < x.n; ++i) {
    T* v = x.sample(i);
    for (std::size_t k = 0; k < len; ++k) v[k] = v[k] > T{0} ? v[k] : v[k] * slope;
  }
}

template <typename T>
void leaky_relu_backward_inplace(FeatureView<const T> y, FeatureView<T> g, T slope) {
  const std::size_t len = static_cast<std::size_t>(y.c) * y.plane();
  for (int i = 0; i < y.n; ++i) {
    const T* v = y.sample(i);
    T* d = g.sample(i);
    for (std::size_t k = 0; k < len; ++k) d[k] = v[k] > T{0} ? d[k] : d[k] * slope;
  }
}

template <typename T>
void upsample_nearest2x(FeatureView<const T> in, Tensor<T>& out) {
  out.reshape_to({in.n, in.c, in.h * 2, in.w * 2});
  const int ow = in.w * 2;
  for (int i = 0; i < in.n; ++i) {
    for (int c = 0; c < in.c; ++c) {
      const T* src = in.sample(i) + c * in.plane();
      T* dst = out.sample(i) + c * out.shape().plane();
      for (int y = 0; y < in.h; ++y) {
        T* r0 = dst + static_cast<std::size_t>(2 * y) * ow;
        for (int x = 0; x < in.w; ++x) {
          const T v = src[y * in.w + x];
          r0[2 * x] = v;
          r0[2 * x + 1] = v;
        }
        std::copy(r0, r0 + ow, r0 + ow);
      }
    }
  }
}

template <typename T>
void upsample_nearest2x_backward(const Tensor<T>& dout, Tensor<T>& din) {
  const int h = dout.h() / 2;
  const int w = dout.w() / 2;
  din.reshape_to({dout.n(), dout.c(), h, w});
  for (int i = 0; i < dout.n(); ++i)
    for (int c = 0; c < dout.c(); ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          din(i, c, y, x) = dout(i, c, 2 * y, 2 * x) + dout(i, c, 2 * y, 2 * x + 1) +
                            dout(i, c, 2 * y + 1, 2 * x) + dout(i, c, 2 * y + 1, 2 * x + 1);
}

template <typename T>
void max_pool2x2(const Tensor<T>& in, Tensor<T>& out, std::vector<std::size_t>& argmax) {
  const int oh = in.h() / 2;
  const int ow = in.w() / 2;
  if (oh < 1 || ow < 1) throw InvalidArgument("max_pool2x2: input smaller than 2x2");
  out.reshape_to({in.n(), in.c(), oh, ow});
  argmax.resize(out.size());
  std::size_t o = 0;
  for (int i = 0; i < in.n(); ++i)
    for (int c = 0; c < in.c(); ++c)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x, ++o) {
          std::size_t best = 0;
          T best_v = -std::numeric_limits<T>::infinity();
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t idx =
                  ((static_cast<std::size_t>(i) * in.c() + c) * in.h() + 2 * y + dy) * in.w() + 2 * x + dx;
              if (in[idx] > best_v) {
                best_v = in[idx];
                best = idx;
              }
            }
          out[o] = best_v;
          argmax[o] = best;
        }
}

template <typename T>
void max_pool2x2_backward(const Tensor<T>& dout, const std::vector<std::size_t>& argmax, Shape input_shape,
                          Tensor<T>& din) {
  din.reshape_to(input_shape);
  din.zero();
  for (std::size_t o = 0; o < dout.size(); ++o) din[argmax[o]] += dout[o];
}

template <typename T>
void global_avg_pool(const Tensor<T>& in, Tensor<T>& out) {
  out.reshape_to({in.n(), in.c(), 1, 1});
  const std::size_t plane = in.shape().plane();
  for (int i = 0; i < in.n(); ++i)
    for (int c = 0; c < in.c(); ++c) {
      const T* x = in.sample(i) + c * plane;
      double s = 0.0;
      for (std::size_t k = 0; k < plane; ++k) s += x[k];
      out(i, c, 0, 0) = static_cast<T>(s / static_cast<double>(plane));
    }
}

template <typename T>
void global_avg_pool_backward(const Tensor<T>& dout, Shape input_shape, Tensor<T>& din) {
  din.reshape_to(input_shape);
  const std::size_t plane = input_shape.plane();
  const T inv = static_cast<T>(1.0 / static_cast<double>(plane));
  for (int i = 0; i < input_shape.n; ++i)
    for (int c = 0; c < input_shape.c; ++c) {
      T* d = din.sample(i) + c * plane;
      std::fill(d, d + plane, dout(i, c, 0, 0) * inv);
    }
}

template <typename T>
void dropout_forward(Tensor<T>& x, double p, Rng& rng, std::vector<T>& mask) {
  mask.resize(x.size());
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = rng.uniform01() < p ? T{0} : keep_scale;
    x[i] *= mask[i];
  }
}

template <typename T>
void dropout_backward(Tensor<T>& g, const std::vector<T>& mask) {
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
}

#define SRDIAG_INSTANTIATE_LAYERS(T)                                                                   \
  template class Conv2d<T>;                                                                            \
  template class Linear<T>;                                                                            \
  template class BatchNorm2d<T>;                                                                       \
  template void leaky_relu_inplace<T>(FeatureView<T>, T);                                              \
  template void leaky_relu_backward_inplace<T>(FeatureView<const T>, FeatureView<T>, T);               \
  template void upsample_nearest2x<T>(FeatureView<const T>, Tensor<T>&);                               \
  template void upsample_nearest2x_backward<T>(const Tensor<T>&, Tensor<T>&);                          \
  template void max_pool2x2<T>(const Tensor<T>&, Tensor<T>&, std::vector<std::size_t>&);               \
  template void max_pool2x2_backward<T>(const Tensor<T>&, const std::vector<std::size_t>&, Shape,      \
                                        Tensor<T>&);                                                   \
  template void global_avg_pool<T>(const Tensor<T>&, Tensor<T>&);                                      \
  template void global_avg_pool_backward<T>(const Tensor<T>&, Shape, Tensor<T>&);                      \
  template void dropout_forward<T>(Tensor<T>&, double, Rng&, std::vector<T>&);                         \
  template void dropout_backward<T>(Tensor<T>&, const std::vector<T>&);

SRDIAG_INSTANTIATE_LAYERS(float)
SRDIAG_INSTANTIATE_LAYERS(double)

}  // namespace srdiag::nn
