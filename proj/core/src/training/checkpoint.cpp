#include "srdiag/training/checkpoint.hpp"

#include "srdiag/error.hpp"

namespace srdiag {

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  TensorArchive archive = cp.tensors;
  archive.metadata = {
      {"format", "srdiag-checkpoint"},
      {"version", kCheckpointVersion},
      {"stage", cp.stage},
      {"iteration", cp.iteration},
      {"epoch", cp.epoch},
      {"epoch_position", cp.epoch_position},
      {"epoch_order", cp.epoch_order},
      {"epoch_sums", cp.epoch_sums},
      {"rng", cp.rng_state},
      {"config", cp.config},
      {"history", cp.history},
      {"extra", cp.tensors.metadata},
  };
  write_archive(path, archive);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  TensorArchive archive = read_archive(path);
  const auto& m = archive.metadata;
  if (!m.is_object() || m.value("format", "") != "srdiag-checkpoint") {
    throw IoError(path.string() + ": not a training checkpoint");
  }
  if (m.value("version", 0) != kCheckpointVersion) {
    throw IoError(path.string() + ": unsupported checkpoint version " + m.at("version").dump());
  }
  Checkpoint cp;
  try {
    cp.stage = m.at("stage").get<std::string>();
    cp.iteration = m.at("iteration").get<std::int64_t>();
    cp.epoch = m.at("epoch").get<std::int64_t>();
    cp.epoch_position = m.at("epoch_position").get<std::int64_t>();
    cp.epoch_order = m.at("epoch_order").get<std::vector<std::uint64_t>>();
    cp.epoch_sums = m.at("epoch_sums").get<std::vector<double>>();
    cp.rng_state = m.at("rng").get<std::string>();
    cp.config = m.at("config");
    cp.history = m.at("history").get<LossHistory>();
    cp.tensors.metadata = m.at("extra");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": corrupt checkpoint state: " + e.what());
  }
  cp.tensors.tensors = std::move(archive.tensors);
  return cp;
}

template <typename T>
void export_adam(const nn::Adam<T>& adam, TensorArchive& archive, const std::string& prefix) {
  const auto& params = adam.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& m = adam.first_moments()[i];
    const auto& v = adam.second_moments()[i];
    const std::vector<std::int64_t> shape(params[i].param->dims.begin(), params[i].param->dims.end());
    archive.tensors[prefix + "m/" + params[i].name] = {shape, {m.values().begin(), m.values().end()}};
    archive.tensors[prefix + "v/" + params[i].name] = {shape, {v.values().begin(), v.values().end()}};
  }
  archive.metadata[prefix + "steps"] = adam.steps();
}

template <typename T>
void import_adam(nn::Adam<T>& adam, const TensorArchive& archive, const std::string& prefix) {
  const auto& params = adam.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (const char* which : {"m/", "v/"}) {
      const std::string name = prefix + which + params[i].name;
      const StoredTensor& st = archive.at(name);
      auto& dst = (which[0] == 'm') ? adam.first_moments()[i] : adam.second_moments()[i];
      if (st.values.size() != dst.size()) throw IoError("checkpoint tensor '" + name + "' has the wrong size");
      auto out = dst.values();
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<T>(st.values[k]);
    }
  }
  if (!archive.metadata.contains(prefix + "steps")) throw IoError("checkpoint lacks '" + prefix + "steps'");
  adam.set_steps(archive.metadata.at(prefix + "steps").get<std::int64_t>());
}

template void export_adam<float>(const nn::Adam<float>&, TensorArchive&, const std::string&);
template void export_adam<double>(const nn::Adam<double>&, TensorArchive&, const std::string&);
template void import_adam<float>(nn::Adam<float>&, const TensorArchive&, const std::string&);
template void import_adam<double>(nn::Adam<double>&, const TensorArchive&, const std::string&);

}  // namespace srdiag
