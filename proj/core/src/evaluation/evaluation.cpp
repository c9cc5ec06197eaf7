#include "srdiag/evaluation/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include "srdiag/datasets/pairs.hpp"
#include "srdiag/error.hpp"
#include "srdiag/imaging/png.hpp"
#include "srdiag/imaging/psnr.hpp"
#include "srdiag/imaging/resample.hpp"
#include "srdiag/imaging/transforms.hpp"
#include "srdiag/io/tensor_archive.hpp"
#include "srdiag/log.hpp"

namespace srdiag {

namespace {

constexpr std::array<const char*, 4> kSheetColumns{kVariantBicubic, kVariantGPix, kVariantGFeat, kVariantOriginal};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DegradedItem degrade_one(std::string source, ImageTensor img, LabelSet truth, int lr_size) {
  if (img.height() < lr_size || img.width() < lr_size) {
    throw InvalidArgument("image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                          " is smaller than " + std::to_string(lr_size));
  }
  ImageTensor lr = bicubic_resize(img, lr_size, lr_size);
  return {std::move(source), std::move(img), std::move(lr), std::move(truth)};
}

}  // namespace

std::uint64_t DegradedSet::lr_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& item : items) {
    for (double v : item.lr.data()) {
      const auto* bytes = reinterpret_cast<const unsigned char*>(&v);
      for (std::size_t i = 0; i < sizeof v; ++i) h = (h ^ bytes[i]) * 1099511628211ULL;
    }
  }
  return h;
}

DegradedSet degrade_testset(const std::vector<ManifestEntry>& entries, int lr_size) {
  if (lr_size < 1) throw InvalidArgument("degrade_testset: lr size must be >= 1");
  DegradedSet out;
  for (const auto& e : entries) {
    try {
      out.items.push_back(degrade_one(e.path, read_png(e.path), e.labels, lr_size));
    } catch (const Error& err) {
      out.skipped.push_back({e.path, err.what()});
      log_warning("skipping " + e.path + ": " + err.what());
    }
  }
  return out;
}

DegradedSet degrade_images(const std::vector<ImageTensor>& images, const std::vector<LabelSet>& truth, int lr_size) {
  if (images.size() != truth.size()) throw InvalidArgument("degrade_images: image/label count mismatch");
  if (lr_size < 1) throw InvalidArgument("degrade_images: lr size must be >= 1");
  DegradedSet out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string source = "#" + std::to_string(i);
    try {
      out.items.push_back(degrade_one(source, images[i], truth[i], lr_size));
    } catch (const Error& err) {
      out.skipped.push_back({source, err.what()});
    }
  }
  return out;
}

ImageTensor restore(const PipelineVariant& variant, const ImageTensor& lr, int scale) {
  if (variant.is_original()) throw InvalidArgument("restore: the original variant has nothing to restore");
  if (variant.name == kVariantBicubic) return bicubic_resize(lr, lr.height() * scale, lr.width() * scale);
  if (variant.restorer == nullptr) {
    throw ConfigError("restore: variant '" + variant.name + "' has no generator parameters loaded");
  }
  if (variant.restorer->config().upscale != scale) {
    throw ConfigError("restore: generator upscales by " + std::to_string(variant.restorer->config().upscale) +
                      ", expected " + std::to_string(scale));
  }
  nn::Tensor<float> sr;
  variant.restorer->forward(to_tensor<float>(lr), sr);
  ImageTensor out = to_image(sr, 0);
  out.clamp01();
  return out;
}

const VariantMetrics* MetricsTable::find(const std::string& variant) const {
  for (const auto& r : rows) {
    if (r.variant == variant) return &r;
  }
  return nullptr;
}

MetricsTable compare_pipelines(Classifier<float>& classifier, const ThresholdVector& thresholds,
                               const LabelSpace& space, const std::vector<PipelineVariant>& variants,
                               const DegradedSet& testset, int keep_samples) {
  MetricsTable table;
  table.skipped = testset.skipped;
  table.lr_hash = testset.lr_hash();
  const int input = classifier.config().input_size;
  std::vector<LabelSet> truth;
  for (const auto& item : testset.items) truth.push_back(item.truth);
  for (const auto& variant : variants) {
    std::vector<ImageTensor> inputs;
    std::vector<LabelSet> kept_truth;
    double psnr_sum = 0.0;
    for (std::size_t i = 0; i < testset.items.size(); ++i) {
      const auto& item = testset.items[i];
      ImageTensor img = variant.is_original() ? item.original : restore(variant, item.lr);
      if (img.height() != input || img.width() != input) {
        throw ConfigError("compare_pipelines: variant '" + variant.name + "' yields " + std::to_string(img.height()) +
                          "x" + std::to_string(img.width()) + " images but the classifier expects " +
                          std::to_string(input));
      }
      if (!variant.is_original()) psnr_sum += psnr(img, item.original);
      if (static_cast<int>(table.samples[variant.name].size()) < keep_samples) table.samples[variant.name].push_back(img);
      inputs.push_back(std::move(img));
    }
    VariantMetrics row;
    row.variant = variant.name;
    row.n = inputs.size();
    row.accuracy = inputs.empty() ? 0.0 : subset_accuracy(predict_all(classifier, inputs, thresholds, space), truth);
    if (!variant.is_original() && !inputs.empty()) row.mean_psnr = psnr_sum / static_cast<double>(inputs.size());
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string report_csv(const MetricsTable& table) {
  std::ostringstream out;
  out << "variant,accuracy,mean_psnr,n\n";
  for (const auto& r : table.rows) {
    out << r.variant << ',' << format_double(r.accuracy) << ','
        << (r.mean_psnr ? format_double(*r.mean_psnr) : std::string()) << ',' << r.n << '\n';
  }
  return out.str();
}

std::vector<VariantMetrics> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<VariantMetrics> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "variant,accuracy,mean_psnr,n") throw ParseError("unexpected report header", line_no);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 4) throw ParseError("expected 4 fields", line_no);
    try {
      VariantMetrics r;
      r.variant = fields[0];
      r.accuracy = std::stod(fields[1]);
      if (!fields[2].empty()) r.mean_psnr = std::stod(fields[2]);
      r.n = std::stoul(fields[3]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", line_no);
    }
  }
  return rows;
}

ImageTensor contact_sheet(const MetricsTable& table, int rows, int crop) {
  if (rows < 0 || crop < 1) throw InvalidArgument("contact_sheet: rows must be >= 0 and crop >= 1");
  int available = 0;
  for (const auto& [name, imgs] : table.samples) available = std::max(available, static_cast<int>(imgs.size()));
  rows = std::min(rows, available);
  const int cols = static_cast<int>(kSheetColumns.size());
  ImageTensor sheet(std::max(rows, 1) * crop, cols * crop, 3, 0.5);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto it = table.samples.find(kSheetColumns[c]);
      if (it == table.samples.end() || r >= static_cast<int>(it->second.size())) continue;
      const ImageTensor& img = it->second[r];
      const int size = std::min({crop, img.height(), img.width()});
      const ImageTensor patch = srdiag::crop(img, (img.height() - size) / 2, (img.width() - size) / 2, size);
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
          for (int ch = 0; ch < 3; ++ch) {
            sheet.at(r * crop + y, c * crop + x, ch) = patch.at(y, x, patch.channels() == 1 ? 0 : ch);
          }
    }
  }
  return sheet;
}

void export_report(const MetricsTable& table, const std::filesystem::path& dir, int rows, int crop) {
  write_file_bytes(dir / "report.csv", report_csv(table));
  write_png(dir / "contact_sheet.png", contact_sheet(table, rows, crop));
}

}  // namespace srdiag
