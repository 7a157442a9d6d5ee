#ifndef SPIKESEV_EVALUATION_HPP
#define SPIKESEV_EVALUATION_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikesev/dataset.hpp"
#include "spikesev/nn/model.hpp"

namespace spikesev {

/// Positive class is label 1 (Mild).
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// prediction = score >= threshold.
ConfusionMatrix confusion(std::span<const std::uint8_t> labels, std::span<const double> scores,
                          double threshold = 0.5);

/// Undefined (zero-denominator) metrics are empty, never 0.
struct BasicRates {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> accuracy;
};

BasicRates basic_rates(const ConfusionMatrix& cm);

enum class Averaging { Positive, Macro, Weighted };
std::string to_string(Averaging averaging);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Some per-class value had a zero denominator and was taken as 0.
  bool degenerate = false;
};

/// Per-class values for class 0 and class 1.
struct PerClassPrf {
  PrecisionRecallF1 negative;
  PrecisionRecallF1 positive;
  std::size_t support_negative = 0;
  std::size_t support_positive = 0;
};

PerClassPrf per_class_prf(const ConfusionMatrix& cm);

/// Positive: class-1 values. Macro: unweighted mean over classes with
/// support (a class absent from the labels is skipped). Weighted: mean
/// weighted by class support.
PrecisionRecallF1 prf(const ConfusionMatrix& cm, Averaging averaging);

/// Probability that a random positive outscores a random negative, ties
/// counted as one half; computed from average ranks in O(n log n).
double roc_auc(std::span<const std::uint8_t> labels, std::span<const double> scores);

struct EvalReport {
  ConfusionMatrix confusion;
  double threshold = 0.5;
  BasicRates rates;
  PrecisionRecallF1 positive;
  PrecisionRecallF1 macro;
  PrecisionRecallF1 weighted;
  std::optional<double> roc_auc;

  /// metric, convention, value (6 decimals; "NA" when undefined).
  void write_tsv(std::ostream& out) const;
  /// 2x2 block oriented as rows = actual (negative, positive), columns =
  /// predicted (negative, positive).
  void write_confusion_tsv(std::ostream& out) const;
  void write_text(std::ostream& out) const;
};

EvalReport evaluate_scores(std::span<const std::uint8_t> labels, std::span<const double> scores,
                           double threshold = 0.5);

/// Inference-mode score per row.
std::vector<double> predict_scores(const nn::Model<float>& model, const Dataset& data);

EvalReport evaluate(const nn::Model<float>& model, const Dataset& test, double threshold = 0.5);

}  // namespace spikesev

#endif  // SPIKESEV_EVALUATION_HPP
