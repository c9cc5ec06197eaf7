#include "srdiag/diagnosis/classifier.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "srdiag/error.hpp"
#include "srdiag/io/json_util.hpp"
#include "srdiag/nn/param_io.hpp"

namespace srdiag {

using nn::Tensor;

DiagnosisConfig DiagnosisConfig::desk() {
  DiagnosisConfig c;
  c.conv_channels = {8, 8, 16, 16, 32, 32, 64, 64};
  c.fc_width = 128;
  c.classes = 4;
  c.batch_size = 32;
  c.epochs = 12;
  return c;
}

void DiagnosisConfig::validate() const {
  if (static_cast<int>(conv_channels.size()) != kConvLayers) {
    throw InvalidArgument("diagnosis: exactly 8 conv layers required, got " + std::to_string(conv_channels.size()));
  }
  for (int c : conv_channels) {
    if (c < 1) throw InvalidArgument("diagnosis: conv channel counts must be positive");
  }
  if (input_size < 16 || input_size % 16 != 0) {
    throw InvalidArgument("diagnosis: input size must be a positive multiple of 16, got " + std::to_string(input_size));
  }
  if (fc_width < 1) throw InvalidArgument("diagnosis: fc width must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("diagnosis: dropout must lie in [0, 1)");
  if (classes < 1) throw InvalidArgument("diagnosis: class count must be >= 1");
  if (batch_size < 1) throw InvalidArgument("diagnosis: batch size must be >= 1");
  if (epochs < 0) throw InvalidArgument("diagnosis: epochs must be >= 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InvalidArgument("diagnosis: validation fraction must lie in (0, 1)");
  }
  optimizer.validate();
}

nlohmann::json DiagnosisConfig::architecture() const {
  return {{"input_size", input_size}, {"conv_channels", conv_channels}, {"fc_width", fc_width}, {"classes", classes}};
}

void to_json(nlohmann::json& j, const DiagnosisConfig& c) {
  j = c.architecture();
  j["dropout"] = c.dropout;
  j["optimizer"] = c.optimizer;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["validation_fraction"] = c.validation_fraction;
  j["seed"] = c.seed;
}

void from_json(const nlohmann::json& j, DiagnosisConfig& c) {
  c.input_size = j.at("input_size").get<int>();
  c.conv_channels = j.at("conv_channels").get<std::vector<int>>();
  c.fc_width = j.at("fc_width").get<int>();
  c.classes = j.at("classes").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.optimizer = j.at("optimizer").get<nn::AdamConfig>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
}

template <typename T>
Classifier<T>::Classifier(const DiagnosisConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  int in = 3;
  for (int i = 0; i < DiagnosisConfig::kConvLayers; ++i) {
    const int stride = (i % 2 == 1) ? 2 : 1;
    units_.emplace_back("conv" + std::to_string(i + 1), in, config_.conv_channels[i], 3, stride, 1, true, 0.0);
    in = config_.conv_channels[i];
  }
  for (auto& u : units_) u.init(rng);
  fc_[0] = nn::Linear<T>(in, config_.fc_width);
  fc_[1] = nn::Linear<T>(config_.fc_width, config_.fc_width);
  fc_[2] = nn::Linear<T>(config_.fc_width, config_.classes);
  fc_[0].init(rng, 1.0, 0.0);
  fc_[1].init(rng, 1.0, 0.0);
  fc_[2].init(rng, 1.0, 1.0);
}

template <typename T>
void Classifier<T>::forward(const Tensor<T>& x, nn::Mode mode, Rng* rng, ClassifierTrace<T>& tr) {
  if (x.c() != 3 || x.h() != config_.input_size || x.w() != config_.input_size) {
    throw InvalidArgument("classifier: expected 3x" + std::to_string(config_.input_size) + "x" +
                          std::to_string(config_.input_size) + " input, got " + nn::to_string(x.shape()));
  }
  const bool train = mode == nn::Mode::kTrain;
  if (train && rng == nullptr && config_.dropout > 0.0) throw InvalidArgument("classifier: train mode needs an rng");
  tr.input = x;
  tr.units.resize(units_.size());
  const Tensor<T>* cur = &tr.input;
  for (std::size_t l = 0; l < units_.size(); ++l) {
    units_[l].forward(nn::view(*cur), mode, train, tr.units[l]);
    cur = &tr.units[l].post;
  }
  nn::global_avg_pool(*cur, tr.pooled);
  cur = &tr.pooled;
  for (int k = 0; k < 2; ++k) {
    fc_[k].forward(*cur, tr.hidden[k]);
    nn::leaky_relu_inplace(nn::view(tr.hidden[k]), T{0});
    if (train && config_.dropout > 0.0) {
      nn::dropout_forward(tr.hidden[k], config_.dropout, *rng, tr.dropout_masks[k]);
    } else {
      tr.dropout_masks[k].clear();
    }
    cur = &tr.hidden[k];
  }
  fc_[2].forward(*cur, tr.logits);
}

template <typename T>
void Classifier<T>::backward(ClassifierTrace<T>& tr, const Tensor<T>& g_logits) {
  Tensor<T> g;
  fc_[2].backward(tr.hidden[1], g_logits, &g, true);
  for (int k = 1; k >= 0; --k) {
    if (!tr.dropout_masks[k].empty()) nn::dropout_backward(g, tr.dropout_masks[k]);
    nn::leaky_relu_backward_inplace(nn::view(std::as_const(tr.hidden[k])), nn::view(g), T{0});
    Tensor<T> g_in;
    fc_[k].backward(k == 0 ? tr.pooled : tr.hidden[k - 1], g, &g_in, true);
    g = std::move(g_in);
  }
  Tensor<T> g_feat;
  nn::global_avg_pool_backward(g, tr.units.back().post.shape(), g_feat);
  g = std::move(g_feat);
  for (int l = static_cast<int>(units_.size()) - 1; l >= 0; --l) {
    const Tensor<T>& in = l == 0 ? tr.input : tr.units[l - 1].post;
    Tensor<T> g_in;
    units_[l].backward(nn::view(in), tr.units[l], g, l > 0 ? &g_in : nullptr, true);
    g = std::move(g_in);
  }
}

template <typename T>
std::vector<std::vector<double>> Classifier<T>::probabilities(const Tensor<T>& x) {
  ClassifierTrace<T> tr;
  forward(x, nn::Mode::kEval, nullptr, tr);
  std::vector<std::vector<double>> out(x.n(), std::vector<double>(config_.classes));
  for (int n = 0; n < x.n(); ++n) {
    for (int k = 0; k < config_.classes; ++k) {
      const double z = static_cast<double>(tr.logits.sample(n)[k]);
      out[n][k] = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
  }
  return out;
}

template <typename T>
std::vector<nn::ParamRef<T>> Classifier<T>::parameters() {
  std::vector<nn::ParamRef<T>> params;
  std::vector<nn::BufferRef<T>> buffers;
  for (auto& u : units_) u.collect(params, buffers);
  for (int k = 0; k < 3; ++k) {
    params.push_back({"fc" + std::to_string(k + 1) + ".weight", &fc_[k].weight});
    params.push_back({"fc" + std::to_string(k + 1) + ".bias", &fc_[k].bias});
  }
  return params;
}

template <typename T>
std::vector<nn::BufferRef<T>> Classifier<T>::buffers() {
  std::vector<nn::ParamRef<T>> params;
  std::vector<nn::BufferRef<T>> buffers;
  for (auto& u : units_) u.collect(params, buffers);
  return buffers;
}

template <typename T>
void Classifier<T>::zero_grad() {
  nn::zero_grads(parameters());
}

template <typename T>
TensorArchive Classifier<T>::to_params() const {
  TensorArchive out;
  auto* self = const_cast<Classifier<T>*>(this);
  nn::export_tensors<T>(self->parameters(), self->buffers(), out);
  out.metadata["model"] = "diagnosis_cnn";
  out.metadata["diagnosis_config"] = config_;
  return out;
}

template <typename T>
void Classifier<T>::load_params(const TensorArchive& params) {
  if (params.metadata.contains("diagnosis_config")) {
    const auto& saved = params.metadata.at("diagnosis_config");
    const nlohmann::json expected = config_.architecture();
    nlohmann::json saved_architecture = nlohmann::json::object();
    for (const auto& [key, value] : expected.items()) {
      if (saved.contains(key)) saved_architecture[key] = saved.at(key);
    }
    if (auto field = first_differing_field(expected, saved_architecture)) {
      throw ConfigError("classifier weights were saved with a different config: field '" + *field + "' differs");
    }
  }
  nn::import_tensors<T>(parameters(), buffers(), params);
}

template class Classifier<float>;
template class Classifier<double>;

}  // namespace srdiag
