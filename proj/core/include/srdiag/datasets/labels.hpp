#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace srdiag {

/// A sample's labels, kept in LabelSpace order by the functions in this header.
using LabelSet = std::vector<std::string>;

/// Closed, ordered vocabulary of class names.
class LabelSpace {
 public:
  LabelSpace() = default;
  /// Throws InvalidArgument on an empty list, empty names or duplicates.
  explicit LabelSpace(std::vector<std::string> names);

  /// The 25-class cucumber task: 11 single diseases, 13 combinations, healthy. The combination
  /// names are placeholders; the source data does not enumerate them.
  static LabelSpace cucumber25();

  /// "class0" ... "class{n-1}", the vocabulary of the synthetic corpus.
  static LabelSpace synthetic(int classes);

  int size() const noexcept { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(int index) const { return names_.at(index); }
  std::optional<int> index_of(const std::string& name) const;
  bool contains(const std::string& name) const { return index_of(name).has_value(); }

  bool operator==(const LabelSpace&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Multi-hot vector of length space.size(). Empty sets and unknown labels are rejected.
std::vector<double> encode_labels(const LabelSet& labels, const LabelSpace& space);

/// Labels whose score is >= the threshold (0.5 for the single-threshold overload), in space order.
LabelSet decode_labels(std::span<const double> scores, const LabelSpace& space, double threshold = 0.5);
LabelSet decode_labels(std::span<const double> scores, const LabelSpace& space, std::span<const double> thresholds);

/// Sorted into space order with duplicates removed; unknown labels are rejected.
LabelSet canonical_labels(const LabelSet& labels, const LabelSpace& space);

}  // namespace srdiag
