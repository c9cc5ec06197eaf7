#include "srdiag/losses/losses.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "srdiag/error.hpp"

namespace srdiag {

using nn::Tensor;

namespace {

const double kLogCap = -std::log(kLogClamp);

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

void require_nonempty(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.empty() || b.empty()) throw InvalidArgument(std::string(op) + ": logit vectors must be non-empty");
}

// mean_i f(sa (a_i - mean b)) + mean_j f(sb (b_j - mean a)), f(x) = min(softplus(x), -log 1e-12).
// Every relativistic loss term -log(max(p, 1e-12)) has this form.
double relativistic_pair(std::span<const double> a, std::span<const double> b, double sa, double sb,
                         std::vector<double>* grad_a, std::vector<double>* grad_b) {
  const double ma = mean(a);
  const double mb = mean(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double loss_a = 0.0, loss_b = 0.0;
  std::vector<double> da(a.size()), db(b.size());  // f'(.) * s for each term
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = sa * (a[i] - mb);
    const double sp = softplus(x);
    loss_a += std::min(sp, kLogCap);
    da[i] = sp < kLogCap ? sa * sigmoid(x) : 0.0;
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double x = sb * (b[j] - ma);
    const double sp = softplus(x);
    loss_b += std::min(sp, kLogCap);
    db[j] = sp < kLogCap ? sb * sigmoid(x) : 0.0;
  }
  if (grad_a != nullptr || grad_b != nullptr) {
    const double sum_da = std::accumulate(da.begin(), da.end(), 0.0);
    const double sum_db = std::accumulate(db.begin(), db.end(), 0.0);
    if (grad_a != nullptr) {
      grad_a->resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) (*grad_a)[i] = da[i] / na - sum_db / (nb * na);
    }
    if (grad_b != nullptr) {
      grad_b->resize(b.size());
      for (std::size_t j = 0; j < b.size(); ++j) (*grad_b)[j] = db[j] / nb - sum_da / (na * nb);
    }
  }
  return loss_a / na + loss_b / nb;
}

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + nn::to_string(a.shape()) + " vs " +
                          nn::to_string(b.shape()));
  }
}

// Mean |a - b|; optionally d/db into grad.
template <typename T>
double mean_abs_diff(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>* grad_b) {
  const auto av = a.values();
  const auto bv = b.values();
  const double inv_n = 1.0 / static_cast<double>(av.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) sum += std::abs(static_cast<double>(av[i]) - static_cast<double>(bv[i]));
  if (grad_b != nullptr) {
    grad_b->reshape_to(b.shape());
    auto g = grad_b->values();
    const T step = static_cast<T>(inv_n);
    for (std::size_t i = 0; i < av.size(); ++i) g[i] = bv[i] > av[i] ? step : (bv[i] < av[i] ? -step : T{0});
  }
  return sum * inv_n;
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda >= 0.0) || !(eta >= 0.0)) throw InvalidArgument("loss weights must be >= 0");
}

template <typename T>
double pixel_loss(const Tensor<T>& hr, const Tensor<T>& sr, Tensor<T>* grad_sr) {
  check_same_shape(hr, sr, "pixel_loss");
  if (hr.size() == 0) throw InvalidArgument("pixel_loss: empty batch");
  return mean_abs_diff(hr, sr, grad_sr);
}

std::vector<double> relativistic_output(std::span<const double> c_a, std::span<const double> c_b) {
  require_nonempty(c_a, c_b, "relativistic_output");
  const double mb = mean(c_b);
  std::vector<double> out(c_a.size());
  for (std::size_t i = 0; i < c_a.size(); ++i) out[i] = sigmoid(c_a[i] - mb);
  return out;
}

double discriminator_loss(std::span<const double> c_hr, std::span<const double> c_sr, std::vector<double>* grad_hr,
                          std::vector<double>* grad_sr) {
  require_nonempty(c_hr, c_sr, "discriminator_loss");
  return relativistic_pair(c_hr, c_sr, -1.0, 1.0, grad_hr, grad_sr);
}

double generator_adv_loss(std::span<const double> c_hr, std::span<const double> c_sr, std::vector<double>* grad_hr,
                          std::vector<double>* grad_sr) {
  require_nonempty(c_hr, c_sr, "generator_adv_loss");
  return relativistic_pair(c_hr, c_sr, 1.0, -1.0, grad_hr, grad_sr);
}

template <typename T>
double perceptual_loss_from_features(const FeatureExtractor<T>& fx, const Tensor<T>& hr_features, const Tensor<T>& sr,
                                     Tensor<T>* grad_sr) {
  Tensor<T> sr_features;
  if (grad_sr == nullptr) {
    fx.forward(sr, sr_features);
    check_same_shape(hr_features, sr_features, "perceptual_loss");
    return mean_abs_diff(hr_features, sr_features, static_cast<Tensor<T>*>(nullptr));
  }
  FeatureExtractorTrace<T> trace;
  fx.forward(sr, sr_features, &trace);
  check_same_shape(hr_features, sr_features, "perceptual_loss");
  Tensor<T> g_features;
  const double loss = mean_abs_diff(hr_features, sr_features, &g_features);
  fx.backward(trace, g_features, *grad_sr);
  return loss;
}

template <typename T>
double perceptual_loss(const FeatureExtractor<T>& fx, const Tensor<T>& hr, const Tensor<T>& sr, Tensor<T>* grad_sr) {
  check_same_shape(hr, sr, "perceptual_loss");
  Tensor<T> hr_features;
  fx.forward(hr, hr_features);
  return perceptual_loss_from_features(fx, hr_features, sr, grad_sr);
}

template <typename T>
GeneratorLoss total_generator_loss(const FeatureExtractor<T>& fx, const LossWeights& weights, const Tensor<T>& hr,
                                   const Tensor<T>& sr, std::span<const double> c_hr, std::span<const double> c_sr,
                                   GeneratorLossGrads<T>* grads) {
  weights.validate();
  GeneratorLoss out;
  Tensor<T> g_pixel;
  out.pixel = pixel_loss(hr, sr, grads != nullptr ? &g_pixel : nullptr);
  out.perceptual = perceptual_loss(fx, hr, sr, grads != nullptr ? &grads->sr : nullptr);
  out.adversarial = generator_adv_loss(c_hr, c_sr, nullptr, grads != nullptr ? &grads->c_sr : nullptr);
  out.total = out.perceptual + weights.lambda * out.adversarial + weights.eta * out.pixel;
  if (grads != nullptr) {
    auto g = grads->sr.values();
    const auto gp = g_pixel.values();
    const T eta = static_cast<T>(weights.eta);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += eta * gp[i];
    for (double& v : grads->c_sr) v *= weights.lambda;
  }
  return out;
}

#define SRDIAG_INSTANTIATE_LOSSES(T)                                                                         \
  template double pixel_loss<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>*);                             \
  template double perceptual_loss<T>(const FeatureExtractor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                     Tensor<T>*);                                                            \
  template double perceptual_loss_from_features<T>(const FeatureExtractor<T>&, const Tensor<T>&,            \
                                                   const Tensor<T>&, Tensor<T>*);                            \
  template GeneratorLoss total_generator_loss<T>(const FeatureExtractor<T>&, const LossWeights&,             \
                                                 const Tensor<T>&, const Tensor<T>&, std::span<const double>, \
                                                 std::span<const double>, GeneratorLossGrads<T>*);

SRDIAG_INSTANTIATE_LOSSES(float)
SRDIAG_INSTANTIATE_LOSSES(double)

}  // namespace srdiag
