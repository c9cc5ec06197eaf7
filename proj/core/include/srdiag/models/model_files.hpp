#pragma once

#include <filesystem>

#include "srdiag/diagnosis/classifier.hpp"
#include "srdiag/models/discriminator.hpp"
#include "srdiag/models/generator.hpp"

namespace srdiag {

/// Build a model from the config snapshot stored in a weights file, then load the weights.
/// Files without a snapshot raise ConfigError; tensor problems raise IoError.
Generator<float> load_generator(const std::filesystem::path& path);
Discriminator<float> load_discriminator(const std::filesystem::path& path);
Classifier<float> load_classifier(const std::filesystem::path& path);

}  // namespace srdiag
