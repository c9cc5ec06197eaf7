#include "srdiag/nn/conv_unit.hpp"

namespace srdiag::nn {

template <typename T>
ConvUnit<T>::ConvUnit(std::string name, int in_channels, int out_channels, int kernel, int stride, int padding,
                      bool batch_norm, std::optional<double> activation_slope)
    : name_(std::move(name)), conv_(in_channels, out_channels, kernel, stride, padding), slope_(activation_slope) {
  if (batch_norm) bn_.emplace(out_channels);
}

template <typename T>
void ConvUnit<T>::init(Rng& rng) {
  conv_.init(rng, 1.0, slope_.value_or(1.0));
}

template <typename T>
void ConvUnit<T>::forward(FeatureView<const T> in, Mode mode, bool update_running, ConvUnitTrace<T>& trace) {
  const int ho = conv_.output_size(in.h);
  const int wo = conv_.output_size(in.w);
  trace.pre.reshape_to({in.n, conv_.out_channels(), ho, wo});
  conv_.forward(in, view(trace.pre));
  trace.post.reshape_to(trace.pre.shape());
  if (bn_) {
    bn_->forward(view(std::as_const(trace.pre)), view(trace.post), mode, update_running, trace.bn);
  } else {
    std::copy(trace.pre.data(), trace.pre.data() + trace.pre.size(), trace.post.data());
  }
  if (slope_) leaky_relu_inplace(view(trace.post), static_cast<T>(*slope_));
}

template <typename T>
void ConvUnit<T>::backward(FeatureView<const T> in, ConvUnitTrace<T>& trace, Tensor<T>& g_post, Tensor<T>* din,
                           bool param_grads) {
  if (slope_) leaky_relu_backward_inplace(view(std::as_const(trace.post)), view(g_post), static_cast<T>(*slope_));
  const Tensor<T>* g_pre = &g_post;
  Tensor<T> g_bn;
  if (bn_) {
    g_bn.reshape_to(g_post.shape());
    bn_->backward(trace.bn, view(std::as_const(g_post)), view(g_bn), param_grads);
    g_pre = &g_bn;
  }
  if (din != nullptr) {
    din->reshape_to({in.n, in.c, in.h, in.w});
    din->zero();
    const FeatureView<T> dv = view(*din);
    conv_.backward(in, view(*g_pre), &dv, param_grads);
  } else {
    conv_.backward(in, view(*g_pre), nullptr, param_grads);
  }
}

template <typename T>
void ConvUnit<T>::collect(std::vector<ParamRef<T>>& params, std::vector<BufferRef<T>>& buffers) {
  params.push_back({name_ + ".weight", &conv_.weight});
  params.push_back({name_ + ".bias", &conv_.bias});
  if (bn_) {
    params.push_back({name_ + ".bn.gamma", &bn_->gamma});
    params.push_back({name_ + ".bn.beta", &bn_->beta});
    buffers.push_back({name_ + ".bn.running_mean", &bn_->running_mean, {bn_->channels()}});
    buffers.push_back({name_ + ".bn.running_var", &bn_->running_var, {bn_->channels()}});
  }
}

template class ConvUnit<float>;
template class ConvUnit<double>;

}  // namespace srdiag::nn
