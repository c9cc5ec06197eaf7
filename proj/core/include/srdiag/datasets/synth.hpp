#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "srdiag/datasets/labels.hpp"
#include "srdiag/datasets/manifest.hpp"
#include "srdiag/imaging/image.hpp"
#include "srdiag/rng.hpp"

namespace srdiag {

/// Parameters of the synthetic texture corpus. Each class is a stripe family with its own
/// per-axis period (in HR pixels); orientation is drawn from {0, 45, 90, 135} degrees so that
/// flips and quarter turns map a class onto itself.
struct SynthConfig {
  int classes = 4;
  int per_class = 100;
  int size = 224;
  std::uint64_t seed = 0;
  std::vector<double> periods;  // empty: default_texture_periods(classes)
  double amplitude_min = 0.12;
  double amplitude_max = 0.22;
  double gradient = 0.1;  // peak magnitude of the low-frequency nuisance ramp

  void validate() const;
  std::vector<double> class_periods() const;
};

std::vector<double> default_texture_periods(int classes);

/// One texture image of the given class; consumes rng.
ImageTensor synth_texture(const SynthConfig& config, int class_index, Rng& rng);

struct SynthCorpus {
  LabelSpace space;
  std::vector<ManifestEntry> entries;
  std::filesystem::path manifest;
};

/// Writes <root>/<class>/<index>.png and <root>/manifest.jsonl. Image i of class c is drawn
/// from its own stream of the seed, so the corpus is identical for a given config.
SynthCorpus synth_corpus(const SynthConfig& config, const std::filesystem::path& root);

/// The same images in memory, class-major order, with their class indices.
std::vector<ImageTensor> synth_images(const SynthConfig& config, std::vector<int>* classes = nullptr);

}  // namespace srdiag
