#include "srdiag/datasets/labels.hpp"

#include <algorithm>
#include <unordered_set>

#include "srdiag/error.hpp"

namespace srdiag {

LabelSpace::LabelSpace(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw InvalidArgument("label space must contain at least one class");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw InvalidArgument("label space: empty class name");
    if (!seen.insert(n).second) throw InvalidArgument("label space: duplicate class '" + n + "'");
  }
}

LabelSpace LabelSpace::cucumber25() {
  return LabelSpace({
      "CCYV", "CMV", "KGMMV", "MYSV", "PRSV", "ZYMV", "WMV", "BrownSpot", "DownyMildew", "GrayMold",
      "PowderyMildew", "Combo01", "Combo02", "Combo03", "Combo04", "Combo05", "Combo06", "Combo07", "Combo08",
      "Combo09", "Combo10", "Combo11", "Combo12", "Combo13", "Healthy",
  });
}

LabelSpace LabelSpace::synthetic(int classes) {
  if (classes < 1) throw InvalidArgument("label space: class count must be >= 1");
  std::vector<std::string> names;
  for (int i = 0; i < classes; ++i) names.push_back("class" + std::to_string(i));
  return LabelSpace(std::move(names));
}

std::optional<int> LabelSpace::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<int>(it - names_.begin());
}

std::vector<double> encode_labels(const LabelSet& labels, const LabelSpace& space) {
  if (labels.empty()) throw InvalidArgument("encode_labels: label set is empty");
  std::vector<double> out(space.size(), 0.0);
  for (const auto& l : labels) {
    const auto idx = space.index_of(l);
    if (!idx) throw InvalidArgument("encode_labels: unknown label '" + l + "'");
    out[*idx] = 1.0;
  }
  return out;
}

LabelSet decode_labels(std::span<const double> scores, const LabelSpace& space, double threshold) {
  const std::vector<double> thresholds(space.size(), threshold);
  return decode_labels(scores, space, thresholds);
}

LabelSet decode_labels(std::span<const double> scores, const LabelSpace& space, std::span<const double> thresholds) {
  if (static_cast<int>(scores.size()) != space.size() || thresholds.size() != scores.size()) {
    throw InvalidArgument("decode_labels: expected " + std::to_string(space.size()) + " scores and thresholds");
  }
  LabelSet out;
  for (int i = 0; i < space.size(); ++i) {
    if (scores[i] >= thresholds[i]) out.push_back(space.name(i));
  }
  return out;
}

LabelSet canonical_labels(const LabelSet& labels, const LabelSpace& space) {
  std::vector<int> idx;
  for (const auto& l : labels) {
    const auto i = space.index_of(l);
    if (!i) throw InvalidArgument("unknown label '" + l + "'");
    idx.push_back(*i);
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  LabelSet out;
  for (int i : idx) out.push_back(space.name(i));
  return out;
}

}  // namespace srdiag
