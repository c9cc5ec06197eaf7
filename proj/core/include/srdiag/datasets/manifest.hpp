#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "srdiag/datasets/labels.hpp"
#include "srdiag/error.hpp"
#include "srdiag/rng.hpp"

namespace srdiag {

inline constexpr int kManifestVersion = 1;

struct ManifestEntry {
  std::string path;  // resolved against the manifest's directory when loaded
  LabelSet labels;   // canonical order

  bool operator==(const ManifestEntry&) const = default;
};

/// JSON-lines manifest. The first non-blank line may be a header {"version": 1}; every other
/// line is {"path": "...", "labels": ["...", ...]}. Relative paths are resolved against the
/// directory containing the manifest. Errors carry the 1-based line number.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path, const LabelSpace& space);
std::vector<ManifestEntry> parse_manifest(const std::string& text, const LabelSpace& space,
                                          const std::filesystem::path& base_dir = {});

/// Writes the header and one line per entry; paths under the manifest's directory are stored relative.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Seeded random partition. The train part has round(fraction * N) items; both parts keep
/// the input's relative order.
template <typename Item>
std::pair<std::vector<Item>, std::vector<Item>> split(const std::vector<Item>& items, double train_fraction,
                                                       std::uint64_t seed);

std::vector<std::size_t> split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

template <typename Item>
std::pair<std::vector<Item>, std::vector<Item>> split(const std::vector<Item>& items, double train_fraction,
                                                       std::uint64_t seed) {
  const auto train_idx = split_indices(items.size(), train_fraction, seed);
  std::vector<char> in_train(items.size(), 0);
  for (auto i : train_idx) in_train[i] = 1;
  std::pair<std::vector<Item>, std::vector<Item>> out;
  for (std::size_t i = 0; i < items.size(); ++i) (in_train[i] ? out.first : out.second).push_back(items[i]);
  return out;
}

}  // namespace srdiag
