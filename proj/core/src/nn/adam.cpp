#include "srdiag/nn/adam.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

#include "srdiag/error.hpp"

namespace srdiag::nn {

void to_json(nlohmann::json& j, const AdamConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}};
}

void from_json(const nlohmann::json& j, AdamConfig& c) {
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("adam: learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw InvalidArgument("adam: beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw InvalidArgument("adam: beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidArgument("adam: epsilon must be > 0");
}

template <typename T>
Adam<T>::Adam(std::vector<ParamRef<T>> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  config_.validate();
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.param->value.shape(), T{0});
    v_.emplace_back(p.param->value.shape(), T{0});
  }
}

template <typename T>
void Adam<T>::step() {
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param<T>& p = *params_[i].param;
    T* value = p.value.data();
    const T* grad = p.grad.data();
    T* m = m_[i].data();
    T* v = v_[i].data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = grad[k];
      const double mk = b1 * m[k] + (1.0 - b1) * g;
      const double vk = b2 * v[k] + (1.0 - b2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double update = lr * (mk / c1) / (std::sqrt(vk / c2) + eps);
      value[k] = static_cast<T>(value[k] - update);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace srdiag::nn
