#include "srdiag/models/model_files.hpp"

#include "srdiag/error.hpp"

namespace srdiag {

namespace {

const nlohmann::json& snapshot(const TensorArchive& archive, const char* key, const std::filesystem::path& path) {
  if (!archive.metadata.is_object() || !archive.metadata.contains(key)) {
    throw ConfigError(path.string() + ": weights file has no '" + key + "' snapshot");
  }
  return archive.metadata.at(key);
}

template <typename Config>
Config parse_snapshot(const nlohmann::json& j, const std::filesystem::path& path) {
  try {
    return j.get<Config>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": malformed config snapshot: " + e.what());
  }
}

}  // namespace

Generator<float> load_generator(const std::filesystem::path& path) {
  const TensorArchive archive = read_archive(path);
  Generator<float> g(parse_snapshot<GeneratorConfig>(snapshot(archive, "generator_config", path), path), 0);
  g.load_params(archive);
  return g;
}

Discriminator<float> load_discriminator(const std::filesystem::path& path) {
  const TensorArchive archive = read_archive(path);
  Discriminator<float> d(parse_snapshot<DiscriminatorConfig>(snapshot(archive, "discriminator_config", path), path),
                         0);
  d.load_params(archive);
  return d;
}

Classifier<float> load_classifier(const std::filesystem::path& path) {
  const TensorArchive archive = read_archive(path);
  Classifier<float> c(parse_snapshot<DiagnosisConfig>(snapshot(archive, "diagnosis_config", path), path), 0);
  c.load_params(archive);
  return c;
}

}  // namespace srdiag
