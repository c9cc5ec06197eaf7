#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srdiag/datasets/manifest.hpp"
#include "srdiag/diagnosis/diagnosis.hpp"
#include "srdiag/models/generator.hpp"

namespace srdiag {

inline constexpr const char* kVariantBicubic = "bicubic";
inline constexpr const char* kVariantGPix = "g_pix";
inline constexpr const char* kVariantGFeat = "g_feat";
inline constexpr const char* kVariantOriginal = "original";

/// One column of the comparison: the original image, bicubic restoration, or a generator.
struct PipelineVariant {
  std::string name;
  const Generator<float>* restorer = nullptr;

  static PipelineVariant original() { return {kVariantOriginal, nullptr}; }
  static PipelineVariant bicubic() { return {kVariantBicubic, nullptr}; }
  static PipelineVariant generator(std::string name, const Generator<float>& g) { return {std::move(name), &g}; }
  bool is_original() const { return name == kVariantOriginal; }
};

struct DegradedItem {
  std::string source;
  ImageTensor original;
  ImageTensor lr;
  LabelSet truth;
};

struct SkippedItem {
  std::string source;
  std::string reason;
};

struct DegradedSet {
  std::vector<DegradedItem> items;
  std::vector<SkippedItem> skipped;

  /// FNV-1a over every LR sample; equal hashes mean byte-identical inputs.
  std::uint64_t lr_hash() const;
};

/// Reads every entry and bicubic-resizes it to lr_size x lr_size. Unreadable or too-small
/// images are recorded in `skipped` instead of aborting.
DegradedSet degrade_testset(const std::vector<ManifestEntry>& entries, int lr_size);
DegradedSet degrade_images(const std::vector<ImageTensor>& images, const std::vector<LabelSet>& truth, int lr_size);

/// scale x upscaling by the variant; generator output is clamped to [0, 1]. The original
/// variant has nothing to restore and is rejected; a generator variant without a model is
/// a ConfigError.
ImageTensor restore(const PipelineVariant& variant, const ImageTensor& lr, int scale = 4);

struct VariantMetrics {
  std::string variant;
  double accuracy = 0.0;
  std::optional<double> mean_psnr;  // absent for the original variant
  std::size_t n = 0;

  bool operator==(const VariantMetrics&) const = default;
};

struct MetricsTable {
  std::vector<VariantMetrics> rows;
  std::vector<SkippedItem> skipped;
  std::uint64_t lr_hash = 0;
  /// Images of the first few samples per variant, for the contact sheet.
  std::map<std::string, std::vector<ImageTensor>> samples;

  const VariantMetrics* find(const std::string& variant) const;
};

/// Restores (or passes through) every item for every variant, classifies, and records subset
/// accuracy and mean PSNR against the original. keep_samples images per variant are kept.
MetricsTable compare_pipelines(Classifier<float>& classifier, const ThresholdVector& thresholds,
                               const LabelSpace& space, const std::vector<PipelineVariant>& variants,
                               const DegradedSet& testset, int keep_samples = 4);

/// <dir>/report.csv with header "variant,accuracy,mean_psnr,n", plus <dir>/contact_sheet.png
/// holding up to `rows` sample rows of center crops in the column order
/// bicubic | g_pix | g_feat | original (absent variants are left mid-gray).
void export_report(const MetricsTable& table, const std::filesystem::path& dir, int rows = 4, int crop = 64);

std::string report_csv(const MetricsTable& table);
std::vector<VariantMetrics> parse_report_csv(const std::string& text);

/// The contact sheet image alone.
ImageTensor contact_sheet(const MetricsTable& table, int rows, int crop);

}  // namespace srdiag
