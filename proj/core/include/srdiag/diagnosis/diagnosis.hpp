#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "srdiag/datasets/labels.hpp"
#include "srdiag/diagnosis/classifier.hpp"
#include "srdiag/imaging/image.hpp"

namespace srdiag {

using Matrix = std::vector<std::vector<double>>;
using ThresholdVector = std::vector<double>;

/// Threshold grid 0.05, 0.10, ..., 0.95.
std::vector<double> threshold_grid();

/// Per class, the grid threshold maximising F1 (prediction is p >= t); ties go to the lowest
/// threshold; classes without a positive sample get 0.5.
ThresholdVector tune_thresholds(const Matrix& probabilities, const Matrix& truth);

/// Fraction of samples whose predicted set equals the true set.
double subset_accuracy(const std::vector<LabelSet>& predictions, const std::vector<LabelSet>& truth);

/// Evaluation-mode probabilities for each image, computed in chunks of batch_size.
template <typename T>
Matrix predict_probabilities(Classifier<T>& model, std::span<const ImageTensor> images, int batch_size = 16);

template <typename T>
LabelSet predict(Classifier<T>& model, const ImageTensor& image, const ThresholdVector& thresholds,
                 const LabelSpace& space);

template <typename T>
std::vector<LabelSet> predict_all(Classifier<T>& model, std::span<const ImageTensor> images,
                                  const ThresholdVector& thresholds, const LabelSpace& space);

struct ClassifierHistory {
  std::vector<double> epoch_loss;  // mean binary cross-entropy per epoch
};

/// Mean per-class binary cross-entropy with Adam, shuffled mini-batches and flip/rotation
/// augmentation (plus a random crop when images exceed the input size). Deterministic for
/// a given cfg.seed.
template <typename T>
ClassifierHistory train_classifier(Classifier<T>& model, std::span<const ImageTensor> images, const Matrix& targets,
                                   const DiagnosisConfig& cfg);

struct DiagnosisFit {
  ThresholdVector thresholds;
  ClassifierHistory history;
  double validation_accuracy = 0.0;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
};

/// Hold out cfg.validation_fraction of the data, train on the rest, tune thresholds on the
/// held-out slice and report its subset accuracy.
template <typename T>
DiagnosisFit fit_diagnosis(Classifier<T>& model, std::span<const ImageTensor> images,
                           const std::vector<LabelSet>& labels, const LabelSpace& space, const DiagnosisConfig& cfg);

void save_thresholds(const std::filesystem::path& path, const ThresholdVector& thresholds, const LabelSpace& space);
/// Throws IoError/ParseError when the file does not match the label space.
ThresholdVector load_thresholds(const std::filesystem::path& path, const LabelSpace& space);

}  // namespace srdiag
