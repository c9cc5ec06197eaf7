#include "srdiag/models/discriminator.hpp"

#include <string>
#include <utility>

#include "srdiag/error.hpp"
#include "srdiag/io/json_util.hpp"
#include "srdiag/nn/param_io.hpp"

namespace srdiag {

using nn::Tensor;

DiscriminatorConfig DiscriminatorConfig::desk() {
  DiscriminatorConfig c;
  c.input_size = 64;
  c.features = {8, 16, 32, 32, 64, 64};
  c.fc_units = 100;
  return c;
}

void DiscriminatorConfig::validate() const {
  if (static_cast<int>(features.size()) != kBlocks) {
    throw InvalidArgument("discriminator: exactly 6 conv_block feature counts required, got " +
                          std::to_string(features.size()));
  }
  if (input_size < 64 || input_size % 64 != 0) {
    throw InvalidArgument("discriminator: input size " + std::to_string(input_size) + " is not divisible by 64");
  }
  for (int f : features) {
    if (f < 1) throw InvalidArgument("discriminator: feature counts must be positive");
  }
  if (!(slope > 0.0)) throw InvalidArgument("discriminator: LReLU slope must be > 0");
  if (fc_units < 1) throw InvalidArgument("discriminator: fc_units must be >= 1");
  if (channels != 1 && channels != 3) throw InvalidArgument("discriminator: channels must be 1 or 3");
}

void to_json(nlohmann::json& j, const DiscriminatorConfig& c) {
  j = {{"input_size", c.input_size}, {"features", c.features}, {"slope", c.slope},
       {"fc_units", c.fc_units},     {"channels", c.channels}};
}

void from_json(const nlohmann::json& j, DiscriminatorConfig& c) {
  c.input_size = j.at("input_size").get<int>();
  c.features = j.at("features").get<std::vector<int>>();
  c.slope = j.at("slope").get<double>();
  c.fc_units = j.at("fc_units").get<int>();
  c.channels = j.at("channels").get<int>();
}

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  int in = config_.channels;
  for (int b = 0; b < DiscriminatorConfig::kBlocks; ++b) {
    const int n = config_.features[b];
    const std::string prefix = "block" + std::to_string(b + 1);
    units_.emplace_back(prefix + ".conv1", in, n, 3, 1, 1, /*batch_norm=*/b != 0, config_.slope);
    units_.emplace_back(prefix + ".conv2", n, n, 4, 2, 1, /*batch_norm=*/true, config_.slope);
    in = n;
  }
  for (auto& u : units_) u.init(rng);
  const int extent = config_.final_extent();
  fc_hidden_ = nn::Linear<T>(in * extent * extent, config_.fc_units);
  fc_hidden_.init(rng, 1.0, config_.slope);
  fc_out_ = nn::Linear<T>(config_.fc_units, 1);
  fc_out_.init(rng, 1.0, 1.0);
}

template <typename T>
std::vector<std::string> Discriminator<T>::conv_layer_names() const {
  std::vector<std::string> names;
  for (const auto& u : units_) names.push_back(u.name());
  return names;
}

template <typename T>
void Discriminator<T>::forward(const Tensor<T>& x, nn::Mode mode, bool update_running, DiscriminatorTrace<T>& tr) {
  if (x.c() != config_.channels || x.h() != config_.input_size || x.w() != config_.input_size) {
    throw InvalidArgument("discriminator: expected input " + std::to_string(config_.channels) + "x" +
                          std::to_string(config_.input_size) + "x" + std::to_string(config_.input_size) + ", got " +
                          nn::to_string(x.shape()));
  }
  tr.input = x;
  tr.units.resize(units_.size());
  const Tensor<T>* cur = &tr.input;
  for (std::size_t l = 0; l < units_.size(); ++l) {
    units_[l].forward(nn::view(*cur), mode, update_running, tr.units[l]);
    cur = &tr.units[l].post;
  }
  fc_hidden_.forward(*cur, tr.hidden);
  nn::leaky_relu_inplace(nn::view(tr.hidden), static_cast<T>(config_.slope));
  fc_out_.forward(tr.hidden, tr.logits);
}

template <typename T>
std::vector<double> Discriminator<T>::logits(const Tensor<T>& x) {
  DiscriminatorTrace<T> tr;
  forward(x, nn::Mode::kEval, false, tr);
  return {tr.logits.values().begin(), tr.logits.values().end()};
}

template <typename T>
void Discriminator<T>::backward(DiscriminatorTrace<T>& tr, const Tensor<T>& g_logits, Tensor<T>* g_input,
                                bool param_grads) {
  Tensor<T> g_hidden;
  fc_out_.backward(tr.hidden, g_logits, &g_hidden, param_grads);
  nn::leaky_relu_backward_inplace(nn::view(std::as_const(tr.hidden)), nn::view(g_hidden), static_cast<T>(config_.slope));
  Tensor<T> g;
  fc_hidden_.backward(tr.units.back().post, g_hidden, &g, param_grads);
  g.reshape_to(tr.units.back().post.shape());  // same element count, restore NCHW view
  for (int l = static_cast<int>(units_.size()) - 1; l >= 0; --l) {
    const Tensor<T>& in = (l == 0) ? tr.input : tr.units[l - 1].post;
    const bool need_input_grad = l > 0 || g_input != nullptr;
    Tensor<T> g_in;
    units_[l].backward(nn::view(in), tr.units[l], g, need_input_grad ? &g_in : nullptr, param_grads);
    g = std::move(g_in);
  }
  if (g_input != nullptr) *g_input = std::move(g);
}

template <typename T>
std::vector<nn::ParamRef<T>> Discriminator<T>::parameters() {
  std::vector<nn::ParamRef<T>> params;
  std::vector<nn::BufferRef<T>> buffers;
  for (auto& u : units_) u.collect(params, buffers);
  params.push_back({"fc1.weight", &fc_hidden_.weight});
  params.push_back({"fc1.bias", &fc_hidden_.bias});
  params.push_back({"fc2.weight", &fc_out_.weight});
  params.push_back({"fc2.bias", &fc_out_.bias});
  return params;
}

template <typename T>
std::vector<nn::BufferRef<T>> Discriminator<T>::buffers() {
  std::vector<nn::ParamRef<T>> params;
  std::vector<nn::BufferRef<T>> buffers;
  for (auto& u : units_) u.collect(params, buffers);
  return buffers;
}

template <typename T>
void Discriminator<T>::zero_grad() {
  nn::zero_grads(parameters());
}

template <typename T>
ModelParams Discriminator<T>::to_params() const {
  ModelParams out;
  auto* self = const_cast<Discriminator<T>*>(this);
  nn::export_tensors<T>(self->parameters(), self->buffers(), out);
  out.metadata["model"] = "relativistic_discriminator";
  out.metadata["discriminator_config"] = config_;
  return out;
}

template <typename T>
void Discriminator<T>::load_params(const ModelParams& params) {
  if (params.metadata.contains("discriminator_config")) {
    const nlohmann::json expected = config_;
    if (auto field = first_differing_field(expected, params.metadata.at("discriminator_config"))) {
      throw ConfigError("discriminator weights were saved with a different config: field '" + *field + "' differs");
    }
  }
  nn::import_tensors<T>(parameters(), buffers(), params);
}

template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace srdiag
