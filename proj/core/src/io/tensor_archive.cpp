#include "srdiag/io/tensor_archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "srdiag/error.hpp"

namespace srdiag {
namespace {

constexpr char kMagic[8] = {'S', 'R', 'D', 'T', 'E', 'N', 'S', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

void put_f32(std::string& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

float get_f32(const std::string& in, std::size_t pos) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

std::int64_t StoredTensor::element_count() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const StoredTensor& TensorArchive::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw IoError("tensor archive is missing tensor '" + name + "'");
  return it->second;
}

std::string encode_archive(const TensorArchive& archive) {
  nlohmann::json header;
  header["format"] = "srdiag-tensors";
  header["version"] = TensorArchive::kVersion;
  header["metadata"] = archive.metadata;
  nlohmann::json entries = nlohmann::json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : archive.tensors) {
    if (t.element_count() != static_cast<std::int64_t>(t.values.size())) {
      throw InvalidArgument("tensor '" + name + "': shape does not match value count");
    }
    const std::uint64_t length = 4 * t.values.size();
    entries[name] = {{"dtype", "F32"}, {"shape", t.shape}, {"offset", offset}, {"length", length}};
    offset += length;
  }
  header["tensors"] = std::move(entries);
  const std::string text = header.dump();

  std::string out(kMagic, kMagic + 8);
  put_u64(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const auto& [name, t] : archive.tensors)
    for (float v : t.values) put_f32(out, v);
  return out;
}

TensorArchive decode_archive(const std::string& bytes, const std::string& source) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw IoError(source + ": not a tensor archive (bad magic)");
  }
  const std::uint64_t header_len = get_u64(bytes, 8);
  if (header_len > bytes.size() - 16) throw IoError(source + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(source + ": corrupt header: " + e.what());
  }
  if (header.value("format", "") != "srdiag-tensors") throw IoError(source + ": unknown container format");
  const int version = header.value("version", -1);
  if (version != TensorArchive::kVersion) {
    throw IoError(source + ": unsupported container version " + std::to_string(version) + " (expected " +
                  std::to_string(TensorArchive::kVersion) + ")");
  }
  const std::size_t data_start = 16 + header_len;
  const std::size_t data_len = bytes.size() - data_start;

  TensorArchive archive;
  archive.metadata = header.value("metadata", nlohmann::json::object());
  try {
    for (const auto& [name, entry] : header.at("tensors").items()) {
      if (entry.at("dtype") != "F32") throw IoError(source + ": tensor '" + name + "' has unsupported dtype");
      StoredTensor t;
      t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto length = entry.at("length").get<std::uint64_t>();
      for (auto d : t.shape) {
        if (d < 0) throw IoError(source + ": tensor '" + name + "' has a negative dimension");
      }
      if (length != 4 * static_cast<std::uint64_t>(t.element_count())) {
        throw IoError(source + ": tensor '" + name + "' length does not match its shape");
      }
      if (offset > data_len || length > data_len - offset) {
        throw IoError(source + ": tensor '" + name + "' data out of range (file truncated?)");
      }
      t.values.resize(length / 4);
      for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = get_f32(bytes, data_start + offset + 4 * i);
      archive.tensors.emplace(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(source + ": malformed tensor table: " + e.what());
  }
  return archive;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_archive(const std::filesystem::path& path, const TensorArchive& archive) {
  write_file_bytes(path, encode_archive(archive));
}

TensorArchive read_archive(const std::filesystem::path& path) {
  return decode_archive(read_file_bytes(path), path.string());
}

}  // namespace srdiag
