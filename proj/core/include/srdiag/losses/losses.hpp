#pragma once

#include <span>
#include <vector>

#include "srdiag/losses/feature_extractor.hpp"
#include "srdiag/nn/tensor.hpp"

namespace srdiag {

/// Weights of the total generator objective L = L_percep + lambda * L_G + eta * L_1.
struct LossWeights {
  double lambda = 5e-3;
  double eta = 1e-2;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

inline constexpr double kLogClamp = 1e-12;

/// Mean absolute difference. When grad_sr is given it receives dL/dsr.
template <typename T>
double pixel_loss(const nn::Tensor<T>& hr, const nn::Tensor<T>& sr, nn::Tensor<T>* grad_sr = nullptr);

/// sigma(c_a[i] - mean(c_b)) for every element of c_a.
std::vector<double> relativistic_output(std::span<const double> c_a, std::span<const double> c_b);

/// -mean log D(HR,SR) - mean log(1 - D(SR,HR)). Optional outputs receive the gradient with
/// respect to each logit.
double discriminator_loss(std::span<const double> c_hr, std::span<const double> c_sr,
                          std::vector<double>* grad_hr = nullptr, std::vector<double>* grad_sr = nullptr);

/// -mean log(1 - D(HR,SR)) - mean log D(SR,HR).
double generator_adv_loss(std::span<const double> c_hr, std::span<const double> c_sr,
                          std::vector<double>* grad_hr = nullptr, std::vector<double>* grad_sr = nullptr);

/// Mean absolute difference of extractor features. grad_sr, if given, receives dL/dsr.
template <typename T>
double perceptual_loss(const FeatureExtractor<T>& fx, const nn::Tensor<T>& hr, const nn::Tensor<T>& sr,
                       nn::Tensor<T>* grad_sr = nullptr);

/// Same, with the hr features already computed.
template <typename T>
double perceptual_loss_from_features(const FeatureExtractor<T>& fx, const nn::Tensor<T>& hr_features,
                                     const nn::Tensor<T>& sr, nn::Tensor<T>* grad_sr = nullptr);

struct GeneratorLoss {
  double total = 0.0;
  double perceptual = 0.0;
  double adversarial = 0.0;
  double pixel = 0.0;
};

/// Gradient outputs of total_generator_loss: image gradient from the perceptual and pixel
/// terms, and the weighted adversarial gradient with respect to the critic values of sr
/// (to be pushed back through the discriminator by the caller).
template <typename T>
struct GeneratorLossGrads {
  nn::Tensor<T> sr;
  std::vector<double> c_sr;
};

template <typename T>
GeneratorLoss total_generator_loss(const FeatureExtractor<T>& fx, const LossWeights& weights,
                                   const nn::Tensor<T>& hr, const nn::Tensor<T>& sr, std::span<const double> c_hr,
                                   std::span<const double> c_sr, GeneratorLossGrads<T>* grads = nullptr);

}  // namespace srdiag
