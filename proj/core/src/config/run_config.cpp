#include "srdiag/config/run_config.hpp"

#include <sstream>

#include "srdiag/error.hpp"
#include "srdiag/io/tensor_archive.hpp"

namespace srdiag {

namespace {

const char* type_name(const nlohmann::json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

bool same_kind(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() && b.is_number_float());
  return std::string(type_name(a)) == type_name(b);
}

// Overlay `user` onto `defaults`, rejecting unknown keys and type changes.
void overlay(nlohmann::json& defaults, const nlohmann::json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config: '" + path + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string field = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) throw ConfigError("config: unknown key '" + field + "'");
    nlohmann::json& slot = defaults[key];
    if (slot.is_object()) {
      overlay(slot, value, field);
    } else if (!same_kind(slot, value)) {
      throw ConfigError("config: '" + field + "' must be a " + type_name(slot) + ", got " + type_name(value));
    } else {
      slot = value;
    }
  }
}

template <typename T>
T convert(const nlohmann::json& j, const char* section) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: section '") + section + "': " + e.what());
  }
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

void rethrow_as_config(const char* section, const auto& fn) {
  try {
    fn();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: section '") + section + "': " + e.what());
  }
}

}  // namespace

LabelSpace parse_label_space(const std::string& spec) {
  if (spec == "cucumber25") return LabelSpace::cucumber25();
  if (spec.rfind("synthetic:", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(spec.substr(10));
    } catch (const std::logic_error&) {
      throw ConfigError("config: bad label space '" + spec + "'");
    }
    return LabelSpace::synthetic(n);
  }
  if (spec.rfind("list:", 0) == 0) {
    std::vector<std::string> names;
    std::stringstream ss(spec.substr(5));
    std::string name;
    while (std::getline(ss, name, ',')) names.push_back(name);
    try {
      return LabelSpace(names);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  throw ConfigError("config: unknown label space '" + spec + "' (use cucumber25, synthetic:<n> or list:a,b,...)");
}

RunConfig RunConfig::reference() {
  RunConfig c;
  c.data.labels = "cucumber25";
  return c;
}

RunConfig RunConfig::desk() {
  RunConfig c;
  c.generator = GeneratorConfig::desk();
  c.discriminator = DiscriminatorConfig::desk();
  c.pixel_stage = PixelStageConfig::desk();
  c.pixel_stage.batch_size = 8;
  c.pixel_stage.iterations = 1000;
  c.gan_stage = GanStageConfig::desk();
  c.diagnosis = DiagnosisConfig::desk();
  c.diagnosis.batch_size = 8;
  c.diagnosis.epochs = 20;
  c.data.labels = "synthetic:4";
  return c;
}

nlohmann::json RunConfig::to_json() const {
  return {
      {"data", {{"manifest", data.manifest}, {"labels", data.labels}, {"train_fraction", data.train_fraction}}},
      {"generator", generator},
      {"discriminator", discriminator},
      {"pixel_stage", pixel_stage},
      {"gan_stage", gan_stage},
      {"diagnosis", diagnosis},
      {"evaluation",
       {{"lr_size", evaluation.lr_size},
        {"contact_rows", evaluation.contact_rows},
        {"contact_crop", evaluation.contact_crop}}},
      {"seed", seed},
      {"deterministic", deterministic},
      {"output_dir", output_dir},
  };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  nlohmann::json user = j;
  std::string preset = "reference";
  if (user.contains("preset")) {
    check(user["preset"].is_string(), "'preset' must be a string");
    preset = user["preset"].get<std::string>();
    user.erase("preset");
  }
  RunConfig base;
  if (preset == "reference") {
    base = reference();
  } else if (preset == "desk") {
    base = desk();
  } else {
    throw ConfigError("config: unknown preset '" + preset + "' (use reference or desk)");
  }
  nlohmann::json merged = base.to_json();
  overlay(merged, user, "");

  RunConfig c;
  c.seed = convert<std::uint64_t>(merged["seed"], "seed");
  c.deterministic = convert<bool>(merged["deterministic"], "deterministic");
  c.output_dir = convert<std::string>(merged["output_dir"], "output_dir");
  const auto& d = merged["data"];
  c.data.manifest = convert<std::string>(d["manifest"], "data");
  c.data.labels = convert<std::string>(d["labels"], "data");
  c.data.train_fraction = convert<double>(d["train_fraction"], "data");
  c.generator = convert<GeneratorConfig>(merged["generator"], "generator");
  c.discriminator = convert<DiscriminatorConfig>(merged["discriminator"], "discriminator");
  c.pixel_stage = convert<PixelStageConfig>(merged["pixel_stage"], "pixel_stage");
  c.gan_stage = convert<GanStageConfig>(merged["gan_stage"], "gan_stage");
  c.diagnosis = convert<DiagnosisConfig>(merged["diagnosis"], "diagnosis");
  const auto& e = merged["evaluation"];
  c.evaluation.lr_size = convert<int>(e["lr_size"], "evaluation");
  c.evaluation.contact_rows = convert<int>(e["contact_rows"], "evaluation");
  c.evaluation.contact_crop = convert<int>(e["contact_crop"], "evaluation");

  auto explicit_seed = [&](const char* section) {
    return user.contains(section) && user[section].is_object() && user[section].contains("seed");
  };
  if (!explicit_seed("pixel_stage")) c.pixel_stage.seed = c.stream_seed(SeedStream::kPixelStage);
  if (!explicit_seed("gan_stage")) c.gan_stage.seed = c.stream_seed(SeedStream::kGanStage);
  if (!explicit_seed("diagnosis")) c.diagnosis.seed = c.stream_seed(SeedStream::kDiagnosis);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  RunConfig c = from_json(j);
  const auto base = path.parent_path();
  if (!c.data.manifest.empty() && std::filesystem::path(c.data.manifest).is_relative() && !base.empty()) {
    c.data.manifest = (base / c.data.manifest).lexically_normal().string();
  }
  auto& fx = c.gan_stage.feature_extractor;
  if (!fx.empty() && !fx.starts_with("random:") && std::filesystem::path(fx).is_relative() && !base.empty()) {
    fx = (base / fx).lexically_normal().string();
  }
  return c;
}

void RunConfig::validate() const {
  rethrow_as_config("generator", [&] { generator.validate(); });
  rethrow_as_config("discriminator", [&] { discriminator.validate(); });
  rethrow_as_config("pixel_stage", [&] { pixel_stage.validate(); });
  rethrow_as_config("gan_stage", [&] { gan_stage.validate(); });
  rethrow_as_config("diagnosis", [&] { diagnosis.validate(); });
  check(data.train_fraction > 0.0 && data.train_fraction < 1.0, "data.train_fraction must lie in (0, 1)");
  check(evaluation.lr_size >= 1, "evaluation.lr_size must be >= 1");
  check(evaluation.contact_rows >= 0, "evaluation.contact_rows must be >= 0");
  check(evaluation.contact_crop >= 1, "evaluation.contact_crop must be >= 1");
  check(discriminator.input_size == gan_stage.crop, "discriminator.input_size must equal gan_stage.crop");
  check(pixel_stage.crop % generator.upscale == 0, "pixel_stage.crop must be divisible by generator.upscale");
  check(diagnosis.input_size == evaluation.lr_size * generator.upscale,
        "diagnosis.input_size must equal evaluation.lr_size * generator.upscale");
  check(label_space().size() == diagnosis.classes, "diagnosis.classes must match the label space size");
}

LabelSpace RunConfig::label_space() const { return parse_label_space(data.labels); }

std::uint64_t RunConfig::stream_seed(SeedStream stream) const {
  return mix_seed(seed, static_cast<std::uint64_t>(stream));
}

}  // namespace srdiag
