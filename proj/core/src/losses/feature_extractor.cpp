#include "srdiag/losses/feature_extractor.hpp"

#include <charconv>
#include <utility>

#include "srdiag/error.hpp"
#include "srdiag/nn/param_io.hpp"

namespace srdiag {

using nn::Tensor;

namespace {

template <typename T>
std::vector<nn::ParamRef<T>> collect_params(std::vector<nn::ConvUnit<T>>& units) {
  std::vector<nn::ParamRef<T>> params;
  std::vector<nn::BufferRef<T>> buffers;
  for (auto& u : units) u.collect(params, buffers);
  return params;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InvalidArgument("feature extractor: bad " + what + " '" + text + "'");
  }
  return v;
}

}  // namespace

template <typename T>
FeatureExtractor<T>::FeatureExtractor(int base_width) : base_width_(base_width) {
  if (base_width < 1) throw InvalidArgument("feature extractor: base width must be >= 1");
  const std::array<int, 5> widths{base_width, 2 * base_width, 4 * base_width, 8 * base_width, 8 * base_width};
  int in = 3;
  for (int b = 0; b < 5; ++b) {
    for (int i = 0; i < kConvsPerBlock[b]; ++i) {
      const bool last = b == 4 && i == kConvsPerBlock[b] - 1;
      const std::string name = "conv" + std::to_string(b + 1) + "_" + std::to_string(i + 1);
      units_.emplace_back(name, in, widths[b], 3, 1, 1, false,
                          last ? std::optional<double>{} : std::optional<double>{0.0});
      in = widths[b];
    }
  }
}

template <typename T>
FeatureExtractor<T> FeatureExtractor<T>::random(std::uint64_t seed, int base_width) {
  FeatureExtractor fx(base_width);
  Rng rng(seed);
  for (auto& u : fx.units_) {
    u.conv().init(rng, 1.0, 0.0);
  }
  return fx;
}

template <typename T>
FeatureExtractor<T> FeatureExtractor<T>::from_params(const TensorArchive& archive) {
  const auto it = archive.tensors.find("conv1_1.weight");
  if (it == archive.tensors.end()) throw IoError("feature extractor: archive is missing tensor 'conv1_1.weight'");
  const auto& shape = it->second.shape;
  if (shape.size() != 4 || shape[1] != 3 || shape[2] != 3 || shape[3] != 3) {
    throw IoError("feature extractor: tensor 'conv1_1.weight' does not have shape [w,3,3,3]");
  }
  FeatureExtractor fx(static_cast<int>(shape[0]));
  nn::import_tensors<T>(collect_params(fx.units_), {}, archive, "", /*strict=*/false);
  return fx;
}

template <typename T>
std::vector<std::string> FeatureExtractor<T>::layer_names() const {
  std::vector<std::string> names;
  for (const auto& u : units_) names.push_back(u.name());
  return names;
}

template <typename T>
nn::Shape FeatureExtractor<T>::output_shape(nn::Shape input) const {
  if (input.c != 3) throw InvalidArgument("feature extractor: expected 3 input channels, got " + std::to_string(input.c));
  if (input.h < kMinInput || input.w < kMinInput) {
    throw InvalidArgument("feature extractor: input " + std::to_string(input.h) + "x" + std::to_string(input.w) +
                          " is smaller than the 32x32 minimum");
  }
  return {input.n, output_channels(), input.h >> 4, input.w >> 4};
}

template <typename T>
void FeatureExtractor<T>::forward(const Tensor<T>& x, Tensor<T>& features, FeatureExtractorTrace<T>* trace) const {
  output_shape(x.shape());
  FeatureExtractorTrace<T> local;
  FeatureExtractorTrace<T>& tr = trace != nullptr ? *trace : local;
  tr.normalized.reshape_to(x.shape());
  const std::size_t plane = static_cast<std::size_t>(x.h()) * x.w();
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < 3; ++c) {
      const T* src = x.sample(n) + c * plane;
      T* dst = tr.normalized.sample(n) + c * plane;
      const T mean = static_cast<T>(kImageNetMean[c]);
      const T inv_std = static_cast<T>(1.0 / kImageNetStd[c]);
      for (std::size_t i = 0; i < plane; ++i) dst[i] = (src[i] - mean) * inv_std;
    }
  }
  tr.units.resize(units_.size());
  tr.pooled.resize(4);
  tr.argmax.resize(4);
  const Tensor<T>* cur = &tr.normalized;
  std::size_t l = 0;
  for (int b = 0; b < 5; ++b) {
    for (int i = 0; i < kConvsPerBlock[b]; ++i, ++l) {
      units_[l].forward(nn::view(*cur), nn::Mode::kEval, false, tr.units[l]);
      cur = &tr.units[l].post;
    }
    if (b < 4) {
      nn::max_pool2x2(*cur, tr.pooled[b], tr.argmax[b]);
      cur = &tr.pooled[b];
    }
  }
  features = *cur;
}

template <typename T>
void FeatureExtractor<T>::backward(FeatureExtractorTrace<T>& tr, const Tensor<T>& g_features,
                                   Tensor<T>& g_input) const {
  Tensor<T> g = g_features;
  int l = static_cast<int>(units_.size()) - 1;
  for (int b = 4; b >= 0; --b) {
    if (b < 4) {
      const nn::Shape in_shape = tr.units[l].post.shape();
      Tensor<T> g_unpooled;
      nn::max_pool2x2_backward(g, tr.argmax[b], in_shape, g_unpooled);
      g = std::move(g_unpooled);
    }
    for (int i = 0; i < kConvsPerBlock[b]; ++i, --l) {
      const bool first_in_block = i == kConvsPerBlock[b] - 1;
      const Tensor<T>& in = l == 0 ? tr.normalized : first_in_block ? tr.pooled[b - 1] : tr.units[l - 1].post;
      Tensor<T> g_in;
      units_[l].backward(nn::view(in), tr.units[l], g, &g_in, false);
      g = std::move(g_in);
    }
  }
  g_input.reshape_to(g.shape());
  const std::size_t plane = static_cast<std::size_t>(g.h()) * g.w();
  for (int n = 0; n < g.n(); ++n) {
    for (int c = 0; c < 3; ++c) {
      const T inv_std = static_cast<T>(1.0 / kImageNetStd[c]);
      const T* src = g.sample(n) + c * plane;
      T* dst = g_input.sample(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * inv_std;
    }
  }
}

template <typename T>
TensorArchive FeatureExtractor<T>::to_params() const {
  TensorArchive out;
  nn::export_tensors<T>(collect_params(units_), {}, out);
  out.metadata["model"] = "vgg19_features";
  out.metadata["base_width"] = base_width_;
  return out;
}

template <typename T>
FeatureExtractor<T> load_feature_extractor(const std::string& source) {
  static const std::string kPrefix = "random:";
  if (source.rfind(kPrefix, 0) == 0) {
    const std::string rest = source.substr(kPrefix.size());
    const auto colon = rest.find(':');
    const std::uint64_t seed = parse_u64(rest.substr(0, colon), "seed");
    int width = 64;
    if (colon != std::string::npos) width = static_cast<int>(parse_u64(rest.substr(colon + 1), "base width"));
    return FeatureExtractor<T>::random(seed, width);
  }
  return FeatureExtractor<T>::from_params(read_archive(source));
}

template class FeatureExtractor<float>;
template class FeatureExtractor<double>;
template FeatureExtractor<float> load_feature_extractor<float>(const std::string&);
template FeatureExtractor<double> load_feature_extractor<double>(const std::string&);

}  // namespace srdiag
