#include "srdiag/models/generator.hpp"

#include <bit>
#include <string>

#include "srdiag/error.hpp"
#include "srdiag/io/json_util.hpp"
#include "srdiag/nn/param_io.hpp"

namespace srdiag {

using nn::Conv2d;
using nn::Tensor;

GeneratorConfig GeneratorConfig::desk() {
  GeneratorConfig c;
  c.rrdb_blocks = 4;
  c.features = 16;
  c.growth = 8;
  return c;
}

void GeneratorConfig::validate() const {
  if (rrdb_blocks < 1) throw InvalidArgument("generator: rrdb_blocks must be >= 1");
  if (features < 1) throw InvalidArgument("generator: features must be >= 1");
  if (growth < 1) throw InvalidArgument("generator: growth must be >= 1");
  if (!(residual_scale > 0.0 && residual_scale <= 1.0)) {
    throw InvalidArgument("generator: residual_scale must be in (0, 1]");
  }
  if (upscale != 2 && upscale != 4 && upscale != 8) throw InvalidArgument("generator: upscale must be 2, 4 or 8");
  if (channels != 1 && channels != 3) throw InvalidArgument("generator: channels must be 1 or 3");
}

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = {{"rrdb_blocks", c.rrdb_blocks}, {"features", c.features},   {"growth", c.growth},
       {"residual_scale", c.residual_scale}, {"upscale", c.upscale}, {"channels", c.channels}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  c.rrdb_blocks = j.at("rrdb_blocks").get<int>();
  c.features = j.at("features").get<int>();
  c.growth = j.at("growth").get<int>();
  c.residual_scale = j.at("residual_scale").get<double>();
  c.upscale = j.at("upscale").get<int>();
  c.channels = j.at("channels").get<int>();
}

namespace {

template <typename T>
void axpy_into(const Tensor<T>& x, T beta, const Tensor<T>& y, Tensor<T>& out) {
  out.reshape_to(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + beta * y[i];
}

template <typename T>
void conv_into(const Conv2d<T>& conv, const Tensor<T>& in, Tensor<T>& out) {
  out.reshape_to({in.n(), conv.out_channels(), conv.output_size(in.h()), conv.output_size(in.w())});
  conv.forward(nn::view(in), nn::view(out));
}

/// g_in = d/d(in) for conv applied to `in`, accumulating parameter gradients.
template <typename T>
void conv_back(Conv2d<T>& conv, const Tensor<T>& in, const Tensor<T>& g_out, Tensor<T>* g_in) {
  if (g_in != nullptr) {
    g_in->reshape_to(in.shape());
    g_in->zero();
    const auto dv = nn::view(*g_in);
    conv.backward(nn::view(in), nn::view(g_out), &dv, true);
  } else {
    conv.backward(nn::view(in), nn::view(g_out), nullptr, true);
  }
}

}  // namespace

template <typename T>
Generator<T>::Generator(const GeneratorConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const int nf = config_.features;
  const int gc = config_.growth;
  const int ch = config_.channels;
  Rng rng(seed);
  conv_first_ = Conv2d<T>(ch, nf, 3, 1, 1);
  conv_first_.init(rng, 1.0, 1.0);
  blocks_.resize(config_.rrdb_blocks);
  for (auto& block : blocks_) {
    for (auto& db : block.dense) {
      for (int i = 0; i < 5; ++i) {
        const int out = (i == 4) ? nf : gc;
        db.conv[i] = Conv2d<T>(nf + i * gc, out, 3, 1, 1);
        if (i == 4) {
          db.conv[i].init(rng, 0.1, 1.0);
        } else {
          db.conv[i].init(rng, 1.0, kSlope);
        }
      }
    }
  }
  trunk_conv_ = Conv2d<T>(nf, nf, 3, 1, 1);
  trunk_conv_.init(rng, 1.0, 1.0);
  const int stages = std::countr_zero(static_cast<unsigned>(config_.upscale));
  for (int s = 0; s < stages; ++s) {
    upconvs_.emplace_back(nf, nf, 3, 1, 1);
    upconvs_.back().init(rng, 1.0, kSlope);
  }
  hr_conv_ = Conv2d<T>(nf, nf, 3, 1, 1);
  hr_conv_.init(rng, 1.0, kSlope);
  conv_last_ = Conv2d<T>(nf, ch, 3, 1, 1);
  conv_last_.init(rng, 1.0, 1.0);
}

template <typename T>
std::vector<std::string> Generator<T>::conv_layer_names() const {
  std::vector<std::string> names{"conv_first"};
  for (std::size_t r = 0; r < blocks_.size(); ++r)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 5; ++i)
        names.push_back("rrdb." + std::to_string(r) + ".dense" + std::to_string(j + 1) + ".conv" +
                        std::to_string(i + 1));
  names.push_back("trunk_conv");
  for (std::size_t s = 0; s < upconvs_.size(); ++s) names.push_back("upconv" + std::to_string(s + 1));
  names.push_back("hr_conv");
  names.push_back("conv_last");
  return names;
}

template <typename T>
void Generator<T>::dense_forward(const DenseBlock& db, const Tensor<T>& x, DenseBlockTrace<T>& tr) const {
  const int nf = config_.features;
  const int gc = config_.growth;
  tr.concat.reshape_to({x.n(), nf + 4 * gc, x.h(), x.w()});
  for (int i = 0; i < x.n(); ++i) std::copy(x.sample(i), x.sample(i) + x.shape().sample_size(), tr.concat.sample(i));
  for (int i = 0; i < 4; ++i) {
    const auto slot = nn::channel_slice(tr.concat, nf + i * gc, gc);
    db.conv[i].forward(nn::channel_prefix(std::as_const(tr.concat), nf + i * gc), slot);
    nn::leaky_relu_inplace(slot, static_cast<T>(kSlope));
  }
  tr.last.reshape_to(x.shape());
  db.conv[4].forward(nn::view(std::as_const(tr.concat)), nn::view(tr.last));
}

template <typename T>
void Generator<T>::rrdb_forward(const Rrdb& block, const Tensor<T>& x, RrdbTrace<T>& tr) const {
  const T beta = static_cast<T>(config_.residual_scale);
  Tensor<T> cur;
  const Tensor<T>* input = &x;
  for (int j = 0; j < 3; ++j) {
    dense_forward(block.dense[j], *input, tr.dense[j]);
    Tensor<T> next;
    axpy_into(*input, beta, tr.dense[j].last, next);
    cur = std::move(next);
    input = &cur;
  }
  axpy_into(x, beta, cur, tr.out);
}

template <typename T>
void Generator<T>::forward(const Tensor<T>& lr, Tensor<T>& sr, GeneratorTrace<T>* trace) const {
  if (lr.c() != config_.channels) {
    throw InvalidArgument("generator: expected " + std::to_string(config_.channels) + " channels, got " +
                          std::to_string(lr.c()));
  }
  if (lr.n() < 1 || lr.h() < 1 || lr.w() < 1) throw InvalidArgument("generator: empty input batch");
  GeneratorTrace<T> local;
  GeneratorTrace<T>& tr = trace ? *trace : local;
  const bool keep = trace != nullptr;
  tr.input = lr;
  conv_into(conv_first_, lr, tr.first);
  tr.rrdb.resize(keep ? blocks_.size() : 2);
  const Tensor<T>* x = &tr.first;
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    RrdbTrace<T>& rt = tr.rrdb[keep ? r : r % 2];
    rrdb_forward(blocks_[r], *x, rt);
    x = &rt.out;
  }
  Tensor<T> trunk;
  conv_into(trunk_conv_, *x, trunk);
  axpy_into(tr.first, T{1}, trunk, tr.body);
  tr.upsampled.resize(upconvs_.size());
  tr.upconv.resize(upconvs_.size());
  const Tensor<T>* s = &tr.body;
  for (std::size_t k = 0; k < upconvs_.size(); ++k) {
    nn::upsample_nearest2x(nn::view(*s), tr.upsampled[k]);
    conv_into(upconvs_[k], tr.upsampled[k], tr.upconv[k]);
    nn::leaky_relu_inplace(nn::view(tr.upconv[k]), static_cast<T>(kSlope));
    s = &tr.upconv[k];
  }
  conv_into(hr_conv_, *s, tr.hr);
  nn::leaky_relu_inplace(nn::view(tr.hr), static_cast<T>(kSlope));
  conv_into(conv_last_, tr.hr, sr);
  if (keep) tr.output = sr;
}

template <typename T>
void Generator<T>::dense_backward(DenseBlock& db, const DenseBlockTrace<T>& tr, const Tensor<T>& g_out,
                                  Tensor<T>& g_in) {
  const int nf = config_.features;
  const int gc = config_.growth;
  const T beta = static_cast<T>(config_.residual_scale);
  Tensor<T> grad(tr.concat.shape(), T{0});
  for (int i = 0; i < g_out.n(); ++i) std::copy(g_out.sample(i), g_out.sample(i) + g_out.shape().sample_size(), grad.sample(i));
  Tensor<T> g_last(g_out.shape());
  for (std::size_t k = 0; k < g_out.size(); ++k) g_last[k] = beta * g_out[k];
  {
    const auto din = nn::view(grad);
    db.conv[4].backward(nn::view(tr.concat), nn::view(std::as_const(g_last)), &din, true);
  }
  for (int i = 3; i >= 0; --i) {
    const auto slot = nn::channel_slice(grad, nf + i * gc, gc);
    nn::leaky_relu_backward_inplace(nn::channel_slice(tr.concat, nf + i * gc, gc), slot, static_cast<T>(kSlope));
    const auto din = nn::channel_prefix(grad, nf + i * gc);
    db.conv[i].backward(nn::channel_prefix(tr.concat, nf + i * gc), nn::as_const(slot), &din, true);
  }
  g_in.reshape_to(g_out.shape());
  for (int i = 0; i < g_out.n(); ++i) {
    std::copy(grad.sample(i), grad.sample(i) + g_out.shape().sample_size(), g_in.sample(i));
  }
}

template <typename T>
void Generator<T>::rrdb_backward(Rrdb& block, const RrdbTrace<T>& tr, const Tensor<T>& g_out, Tensor<T>& g_in) {
  const T beta = static_cast<T>(config_.residual_scale);
  Tensor<T> g(g_out.shape());
  for (std::size_t k = 0; k < g_out.size(); ++k) g[k] = beta * g_out[k];
  for (int j = 2; j >= 0; --j) {
    Tensor<T> g_prev;
    dense_backward(block.dense[j], tr.dense[j], g, g_prev);
    g = std::move(g_prev);
  }
  g_in.reshape_to(g_out.shape());
  for (std::size_t k = 0; k < g_out.size(); ++k) g_in[k] = g_out[k] + g[k];
}

template <typename T>
void Generator<T>::backward(const GeneratorTrace<T>& tr, const Tensor<T>& g_sr, Tensor<T>* g_lr) {
  if (tr.rrdb.size() != blocks_.size()) throw InvalidArgument("generator: trace does not match model");
  const T slope = static_cast<T>(kSlope);
  Tensor<T> g_hr;
  conv_back(conv_last_, tr.hr, g_sr, &g_hr);
  nn::leaky_relu_backward_inplace(nn::view(tr.hr), nn::view(g_hr), slope);
  const Tensor<T>& s_last = upconvs_.empty() ? tr.body : tr.upconv.back();
  Tensor<T> g_s;
  conv_back(hr_conv_, s_last, g_hr, &g_s);
  for (int k = static_cast<int>(upconvs_.size()) - 1; k >= 0; --k) {
    nn::leaky_relu_backward_inplace(nn::view(tr.upconv[k]), nn::view(g_s), slope);
    Tensor<T> g_up;
    conv_back(upconvs_[k], tr.upsampled[k], g_s, &g_up);
    nn::upsample_nearest2x_backward(g_up, g_s);
  }
  // body = first + trunk(x_last)
  const Tensor<T>& x_last = blocks_.empty() ? tr.first : tr.rrdb.back().out;
  Tensor<T> g_x;
  conv_back(trunk_conv_, x_last, g_s, &g_x);
  for (int r = static_cast<int>(blocks_.size()) - 1; r >= 0; --r) {
    Tensor<T> g_prev;
    rrdb_backward(blocks_[r], tr.rrdb[r], g_x, g_prev);
    g_x = std::move(g_prev);
  }
  Tensor<T> g_first(g_s.shape());
  for (std::size_t k = 0; k < g_s.size(); ++k) g_first[k] = g_s[k] + g_x[k];
  conv_back(conv_first_, tr.input, g_first, g_lr);
}

template <typename T>
std::vector<nn::ParamRef<T>> Generator<T>::parameters() {
  std::vector<nn::ParamRef<T>> params;
  auto add = [&params](const std::string& name, Conv2d<T>& conv) {
    params.push_back({name + ".weight", &conv.weight});
    params.push_back({name + ".bias", &conv.bias});
  };
  add("conv_first", conv_first_);
  for (std::size_t r = 0; r < blocks_.size(); ++r)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 5; ++i)
        add("rrdb." + std::to_string(r) + ".dense" + std::to_string(j + 1) + ".conv" + std::to_string(i + 1),
            blocks_[r].dense[j].conv[i]);
  add("trunk_conv", trunk_conv_);
  for (std::size_t s = 0; s < upconvs_.size(); ++s) add("upconv" + std::to_string(s + 1), upconvs_[s]);
  add("hr_conv", hr_conv_);
  add("conv_last", conv_last_);
  return params;
}

template <typename T>
void Generator<T>::zero_grad() {
  nn::zero_grads(parameters());
}

template <typename T>
ModelParams Generator<T>::to_params() const {
  ModelParams out;
  auto* self = const_cast<Generator<T>*>(this);
  nn::export_tensors<T>(self->parameters(), {}, out);
  out.metadata["model"] = "rrdb_generator";
  out.metadata["generator_config"] = config_;
  return out;
}

template <typename T>
void Generator<T>::load_params(const ModelParams& params) {
  if (params.metadata.contains("generator_config")) {
    const nlohmann::json expected = config_;
    if (auto field = first_differing_field(expected, params.metadata.at("generator_config"))) {
      throw ConfigError("generator weights were saved with a different config: field '" + *field + "' differs");
    }
  }
  nn::import_tensors<T>(parameters(), {}, params);
}

template <typename T>
void Generator<T>::zero_residual_branches() {
  for (auto& block : blocks_)
    for (auto& db : block.dense) {
      db.conv[4].weight.value.zero();
      db.conv[4].bias.value.zero();
    }
}

template class Generator<float>;
template class Generator<double>;

}  // namespace srdiag
