#include "srdiag/diagnosis/diagnosis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "srdiag/datasets/manifest.hpp"
#include "srdiag/datasets/pairs.hpp"
#include "srdiag/error.hpp"
#include "srdiag/imaging/transforms.hpp"
#include "srdiag/io/tensor_archive.hpp"
#include "srdiag/log.hpp"

namespace srdiag {

using nn::Tensor;

namespace {

enum Stream : std::uint64_t { kValidationSplit = 1, kTraining = 2 };

void check_matrix(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.size() != rows) throw InvalidArgument(std::string("tune_thresholds: ") + what + " row count mismatch");
  for (const auto& row : m) {
    if (row.size() != cols) throw InvalidArgument(std::string("tune_thresholds: ") + what + " column count mismatch");
  }
}

template <typename T>
double bce_loss(const Tensor<T>& logits, const Matrix& targets, std::span<const std::size_t> rows, Tensor<T>& grad) {
  const int n = logits.n();
  const int k = logits.c();
  grad.reshape_to(logits.shape());
  const double inv = 1.0 / (static_cast<double>(n) * k);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& y = targets[rows[i]];
    for (int c = 0; c < k; ++c) {
      const double z = static_cast<double>(logits.sample(i)[c]);
      loss += std::max(z, 0.0) - z * y[c] + std::log1p(std::exp(-std::abs(z)));
      const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
      grad.sample(i)[c] = static_cast<T>((p - y[c]) * inv);
    }
  }
  return loss * inv;
}

ImageTensor fit_input(const ImageTensor& img, int size, Rng& rng) {
  if (img.height() < size || img.width() < size) {
    throw InvalidArgument("classifier: image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                          " is smaller than the " + std::to_string(size) + " input");
  }
  ImageTensor x = (img.height() == size && img.width() == size) ? img : random_crop(img, size, rng);
  return augment(x, rng);
}

}  // namespace

std::vector<double> threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
  return grid;
}

ThresholdVector tune_thresholds(const Matrix& probabilities, const Matrix& truth) {
  const std::size_t rows = probabilities.size();
  const std::size_t cols = rows == 0 ? (truth.empty() ? 0 : truth.front().size()) : probabilities.front().size();
  check_matrix(probabilities, rows, cols, "probability");
  check_matrix(truth, rows, cols, "truth");
  const auto grid = threshold_grid();
  ThresholdVector out(cols, 0.5);
  for (std::size_t c = 0; c < cols; ++c) {
    const bool any_positive = std::any_of(truth.begin(), truth.end(), [c](const auto& r) { return r[c] >= 0.5; });
    if (!any_positive) continue;
    double best_f1 = -1.0;
    for (double t : grid) {
      int tp = 0, fp = 0, fn = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        const bool pred = probabilities[r][c] >= t;
        const bool pos = truth[r][c] >= 0.5;
        tp += pred && pos;
        fp += pred && !pos;
        fn += !pred && pos;
      }
      const double f1 = 2.0 * tp / (2.0 * tp + fp + fn);
      if (f1 > best_f1) {
        best_f1 = f1;
        out[c] = t;
      }
    }
  }
  return out;
}

double subset_accuracy(const std::vector<LabelSet>& predictions, const std::vector<LabelSet>& truth) {
  if (predictions.size() != truth.size()) {
    throw InvalidArgument("subset_accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                          std::to_string(truth.size()) + " truth sets");
  }
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    LabelSet a = predictions[i], b = truth[i];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    hits += a == b;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

template <typename T>
Matrix predict_probabilities(Classifier<T>& model, std::span<const ImageTensor> images, int batch_size) {
  Matrix out;
  out.reserve(images.size());
  for (std::size_t start = 0; start < images.size(); start += batch_size) {
    const std::size_t count = std::min<std::size_t>(batch_size, images.size() - start);
    auto probs = model.probabilities(to_tensor<T>(images.subspan(start, count)));
    for (auto& row : probs) out.push_back(std::move(row));
  }
  return out;
}

template <typename T>
LabelSet predict(Classifier<T>& model, const ImageTensor& image, const ThresholdVector& thresholds,
                 const LabelSpace& space) {
  if (static_cast<int>(thresholds.size()) != space.size() || space.size() != model.config().classes) {
    throw InvalidArgument("predict: threshold, label space and classifier sizes disagree");
  }
  const auto probs = model.probabilities(to_tensor<T>(image));
  return decode_labels(probs.front(), space, thresholds);
}

template <typename T>
std::vector<LabelSet> predict_all(Classifier<T>& model, std::span<const ImageTensor> images,
                                  const ThresholdVector& thresholds, const LabelSpace& space) {
  if (static_cast<int>(thresholds.size()) != space.size() || space.size() != model.config().classes) {
    throw InvalidArgument("predict: threshold, label space and classifier sizes disagree");
  }
  std::vector<LabelSet> out;
  for (const auto& row : predict_probabilities(model, images)) out.push_back(decode_labels(row, space, thresholds));
  return out;
}

template <typename T>
ClassifierHistory train_classifier(Classifier<T>& model, std::span<const ImageTensor> images, const Matrix& targets,
                                   const DiagnosisConfig& cfg) {
  cfg.validate();
  if (images.size() != targets.size()) throw InvalidArgument("train_classifier: image/target count mismatch");
  ClassifierHistory history;
  if (cfg.epochs == 0) return history;
  if (images.empty()) throw InvalidArgument("train_classifier: no training data");
  for (int c = 0; c < cfg.classes; ++c) {
    const bool present = std::any_of(targets.begin(), targets.end(), [c](const auto& t) { return t.at(c) >= 0.5; });
    if (!present) log_warning("class " + std::to_string(c) + " has no training samples; its threshold falls back to 0.5");
  }
  Rng rng(mix_seed(cfg.seed, kTraining));
  nn::Adam<T> adam(model.parameters(), cfg.optimizer);
  ClassifierTrace<T> trace;
  std::vector<std::size_t> order(images.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min<std::size_t>(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> rows(order.data() + start, count);
      std::vector<ImageTensor> batch;
      for (auto r : rows) batch.push_back(fit_input(images[r], cfg.input_size, rng));
      model.zero_grad();
      model.forward(to_tensor<T>(batch), nn::Mode::kTrain, &rng, trace);
      Tensor<T> g;
      const double loss = bce_loss(trace.logits, targets, rows, g);
      if (!std::isfinite(loss)) throw DivergenceError("classifier loss became non-finite at epoch " + std::to_string(epoch));
      model.backward(trace, g);
      adam.step();
      epoch_loss += loss * count;
      seen += count;
    }
    history.epoch_loss.push_back(epoch_loss / seen);
    log(LogLevel::kDebug, "classifier epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(epoch_loss / seen));
  }
  return history;
}

template <typename T>
DiagnosisFit fit_diagnosis(Classifier<T>& model, std::span<const ImageTensor> images, const std::vector<LabelSet>& labels,
                           const LabelSpace& space, const DiagnosisConfig& cfg) {
  cfg.validate();
  if (images.size() != labels.size()) throw InvalidArgument("fit_diagnosis: image/label count mismatch");
  if (space.size() != cfg.classes) {
    throw ConfigError("diagnosis: config has " + std::to_string(cfg.classes) + " classes but the label space has " +
                      std::to_string(space.size()));
  }
  if (images.size() < 2) throw InvalidArgument("fit_diagnosis: need at least two samples");
  const auto val_idx = split_indices(images.size(), cfg.validation_fraction, mix_seed(cfg.seed, kValidationSplit));
  std::vector<char> is_val(images.size(), 0);
  for (auto i : val_idx) is_val[i] = 1;
  std::vector<ImageTensor> train_images, val_images;
  Matrix train_targets, val_targets;
  std::vector<LabelSet> val_labels;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (is_val[i]) {
      val_images.push_back(images[i]);
      val_targets.push_back(encode_labels(labels[i], space));
      val_labels.push_back(labels[i]);
    } else {
      train_images.push_back(images[i]);
      train_targets.push_back(encode_labels(labels[i], space));
    }
  }
  DiagnosisFit fit;
  fit.train_count = train_images.size();
  fit.validation_count = val_images.size();
  fit.history = train_classifier(model, train_images, train_targets, cfg);
  const Matrix probs = predict_probabilities(model, val_images);
  fit.thresholds = tune_thresholds(probs, val_targets);
  std::vector<LabelSet> preds;
  for (const auto& row : probs) preds.push_back(decode_labels(row, space, fit.thresholds));
  fit.validation_accuracy = val_images.empty() ? 0.0 : subset_accuracy(preds, val_labels);
  return fit;
}

void save_thresholds(const std::filesystem::path& path, const ThresholdVector& thresholds, const LabelSpace& space) {
  if (static_cast<int>(thresholds.size()) != space.size()) {
    throw InvalidArgument("save_thresholds: one threshold per class required");
  }
  const nlohmann::json j = {{"version", 1}, {"classes", space.names()}, {"thresholds", thresholds}};
  write_file_bytes(path, j.dump(2) + "\n");
}

ThresholdVector load_thresholds(const std::filesystem::path& path, const LabelSpace& space) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("version", 0) != 1) throw ParseError(path.string() + ": unsupported thresholds file");
  const auto classes = j.at("classes").get<std::vector<std::string>>();
  if (classes != space.names()) throw ConfigError(path.string() + ": class list does not match the label space");
  auto t = j.at("thresholds").get<ThresholdVector>();
  if (t.size() != classes.size()) throw ParseError(path.string() + ": one threshold per class required");
  return t;
}

#define SRDIAG_INSTANTIATE_DIAGNOSIS(T)                                                                         \
  template Matrix predict_probabilities<T>(Classifier<T>&, std::span<const ImageTensor>, int);                  \
  template LabelSet predict<T>(Classifier<T>&, const ImageTensor&, const ThresholdVector&, const LabelSpace&);  \
  template std::vector<LabelSet> predict_all<T>(Classifier<T>&, std::span<const ImageTensor>,                   \
                                                const ThresholdVector&, const LabelSpace&);                     \
  template ClassifierHistory train_classifier<T>(Classifier<T>&, std::span<const ImageTensor>, const Matrix&,    \
                                                 const DiagnosisConfig&);                                        \
  template DiagnosisFit fit_diagnosis<T>(Classifier<T>&, std::span<const ImageTensor>,                          \
                                         const std::vector<LabelSet>&, const LabelSpace&, const DiagnosisConfig&);

SRDIAG_INSTANTIATE_DIAGNOSIS(float)
SRDIAG_INSTANTIATE_DIAGNOSIS(double)

}  // namespace srdiag
