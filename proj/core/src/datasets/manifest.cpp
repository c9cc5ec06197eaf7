#include "srdiag/datasets/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "srdiag/io/tensor_archive.hpp"

namespace fs = std::filesystem;

namespace srdiag {

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(const std::string& text, const LabelSpace& space, const fs::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("malformed JSON: " + std::string(e.what()), line_no);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", line_no);
    const bool header = first_record && j.contains("version") && !j.contains("path");
    first_record = false;
    if (header) {
      if (!j["version"].is_number_integer() || j["version"].get<int>() != kManifestVersion) {
        throw ParseError("unsupported manifest version " + j["version"].dump(), line_no);
      }
      continue;
    }
    if (!j.contains("path")) throw ParseError("missing field 'path'", line_no);
    if (!j.contains("labels")) throw ParseError("missing field 'labels'", line_no);
    if (!j["path"].is_string() || j["path"].get<std::string>().empty()) {
      throw ParseError("field 'path' must be a non-empty string", line_no);
    }
    if (!j["labels"].is_array()) throw ParseError("field 'labels' must be an array of strings", line_no);
    LabelSet labels;
    for (const auto& l : j["labels"]) {
      if (!l.is_string()) throw ParseError("field 'labels' must be an array of strings", line_no);
      const auto name = l.get<std::string>();
      if (!space.contains(name)) throw ParseError("unknown label '" + name + "'", line_no);
      labels.push_back(name);
    }
    if (labels.empty()) throw ParseError("label set is empty", line_no);
    fs::path p = j["path"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    const std::string resolved = p.lexically_normal().string();
    if (!seen.insert(resolved).second) throw ParseError("duplicate path '" + j["path"].get<std::string>() + "'", line_no);
    entries.push_back({resolved, canonical_labels(labels, space)});
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const fs::path& path, const LabelSpace& space) {
  if (!fs::exists(path)) throw IoError("manifest not found: " + path.string());
  const std::string text = read_file_bytes(path);
  try {
    return parse_manifest(text, space, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ostringstream out;
  out << nlohmann::json{{"version", kManifestVersion}}.dump() << '\n';
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  for (const auto& e : entries) {
    fs::path p = e.path;
    const fs::path rel = p.lexically_relative(base);
    if (!rel.empty() && *rel.begin() != "..") p = rel;
    out << nlohmann::json{{"path", p.generic_string()}, {"labels", e.labels}}.dump() << '\n';
  }
  write_file_bytes(path, out.str());
}

std::vector<std::size_t> split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("split: train fraction must lie in (0, 1), got " + std::to_string(train_fraction));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  order.resize(n_train);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace srdiag
