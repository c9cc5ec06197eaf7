#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace srdiag {

/// One named tensor as persisted: dims plus float32 values in row-major order.
struct StoredTensor {
  std::vector<std::int64_t> shape;
  std::vector<float> values;

  std::int64_t element_count() const;
  bool operator==(const StoredTensor&) const = default;
};

/// Named-tensor container used for model weights, feature extractors and checkpoints.
///
/// Layout on disk:
///
///     bytes 0..7    magic "SRDTENS1"
///     bytes 8..15   header length N, unsigned 64-bit little-endian
///     next N bytes  JSON header:
///                   {"format": "srdiag-tensors", "version": 1,
///                    "metadata": {...},
///                    "tensors": {"<name>": {"dtype": "F32", "shape": [...],
///                                           "offset": <byte offset into data>,
///                                           "length": <byte count>}, ...}}
///     remainder     tensor data, float32 little-endian, tensors in name order
///
/// Encoding is deterministic: equal archives produce identical bytes.
struct TensorArchive {
  static constexpr int kVersion = 1;

  std::map<std::string, StoredTensor> tensors;
  nlohmann::json metadata = nlohmann::json::object();

  bool contains(const std::string& name) const { return tensors.count(name) != 0; }

  /// Throws IoError naming the tensor when it is absent.
  const StoredTensor& at(const std::string& name) const;

  bool operator==(const TensorArchive&) const = default;
};

std::string encode_archive(const TensorArchive& archive);
TensorArchive decode_archive(const std::string& bytes, const std::string& source = "<memory>");

void write_archive(const std::filesystem::path& path, const TensorArchive& archive);
TensorArchive read_archive(const std::filesystem::path& path);

/// Whole-file helpers shared by the other persistence code.
std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace srdiag
