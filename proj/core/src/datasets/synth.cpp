#include "srdiag/datasets/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "srdiag/error.hpp"
#include "srdiag/imaging/png.hpp"

namespace fs = std::filesystem;

namespace srdiag {

namespace {

constexpr double kMinPeriod = 6.0;
constexpr double kMaxPeriod = 14.0;

// Stripe directions (x, y) for 0, 45, 90 and 135 degrees.
constexpr std::array<std::array<int, 2>, 4> kDirections{{{1, 0}, {1, 1}, {0, 1}, {1, -1}}};

}  // namespace

std::vector<double> default_texture_periods(int classes) {
  if (classes < 2) throw InvalidArgument("synth: at least 2 classes required");
  std::vector<double> periods(classes);
  for (int i = 0; i < classes; ++i) {
    periods[i] = kMinPeriod * std::pow(kMaxPeriod / kMinPeriod, static_cast<double>(i) / (classes - 1));
  }
  return periods;
}

void SynthConfig::validate() const {
  if (classes < 2) throw InvalidArgument("synth: at least 2 classes required, got " + std::to_string(classes));
  if (per_class < 1) throw InvalidArgument("synth: per-class count must be >= 1");
  if (size < 16) throw InvalidArgument("synth: image size must be >= 16");
  if (!periods.empty() && static_cast<int>(periods.size()) != classes) {
    throw InvalidArgument("synth: expected " + std::to_string(classes) + " periods, got " +
                          std::to_string(periods.size()));
  }
  for (double p : periods) {
    if (!(p >= 2.0)) throw InvalidArgument("synth: texture periods must be >= 2 pixels");
  }
  if (!(amplitude_min > 0.0 && amplitude_min <= amplitude_max && amplitude_max <= 0.3)) {
    throw InvalidArgument("synth: amplitudes must satisfy 0 < min <= max <= 0.3");
  }
  if (!(gradient >= 0.0 && gradient <= 0.15)) throw InvalidArgument("synth: gradient must lie in [0, 0.15]");
}

std::vector<double> SynthConfig::class_periods() const {
  return periods.empty() ? default_texture_periods(classes) : periods;
}

ImageTensor synth_texture(const SynthConfig& config, int class_index, Rng& rng) {
  const double period = config.class_periods().at(class_index);
  const auto dir = kDirections[rng.uniform_int(kDirections.size())];
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double amplitude = rng.uniform(config.amplitude_min, config.amplitude_max);
  std::array<double, 3> base{};
  std::array<double, 3> tint{};
  for (int c = 0; c < 3; ++c) {
    base[c] = rng.uniform(0.35, 0.65);
    tint[c] = rng.uniform(0.7, 1.0);
  }
  const double ramp_angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double ramp = rng.uniform(-config.gradient, config.gradient);
  const double gx = std::cos(ramp_angle), gy = std::sin(ramp_angle);

  const int n = config.size;
  const double w = 2.0 * std::numbers::pi / period;
  const double half = 0.5 * (n - 1);
  ImageTensor img(n, n, 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double t = amplitude * std::cos(w * (dir[0] * x + dir[1] * y) + phase);
      const double lf = ramp * (gx * (x - half) + gy * (y - half)) / half;
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = base[c] + lf + tint[c] * t;
    }
  }
  img.clamp01();
  return img;
}

std::vector<ImageTensor> synth_images(const SynthConfig& config, std::vector<int>* classes) {
  config.validate();
  std::vector<ImageTensor> images;
  if (classes != nullptr) classes->clear();
  for (int c = 0; c < config.classes; ++c) {
    for (int i = 0; i < config.per_class; ++i) {
      Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(c) * 1'000'003ULL + i));
      images.push_back(synth_texture(config, c, rng));
      if (classes != nullptr) classes->push_back(c);
    }
  }
  return images;
}

SynthCorpus synth_corpus(const SynthConfig& config, const fs::path& root) {
  config.validate();
  SynthCorpus corpus{LabelSpace::synthetic(config.classes), {}, root / "manifest.jsonl"};
  for (int c = 0; c < config.classes; ++c) {
    const std::string name = corpus.space.name(c);
    fs::create_directories(root / name);
    for (int i = 0; i < config.per_class; ++i) {
      Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(c) * 1'000'003ULL + i));
      const fs::path file = root / name / (std::to_string(i) + ".png");
      write_png(file, synth_texture(config, c, rng));
      corpus.entries.push_back({file.lexically_normal().string(), {name}});
    }
  }
  write_manifest(corpus.manifest, corpus.entries);
  return corpus;
}

}  // namespace srdiag
