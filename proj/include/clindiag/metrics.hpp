#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"

#include "clindiag/encoding.hpp"
#include "clindiag/svm.hpp"

namespace clindiag {

/// Rows are the call (Positive/Negative), columns the truth (Patient/Normal).
struct ConfusionMatrix {
  std::uint64_t tp = 0;  // Patient, called Positive
  std::uint64_t fp = 0;  // Normal, called Positive
  std::uint64_t fn = 0;  // Patient, called Negative
  std::uint64_t tn = 0;  // Normal, called Negative

  std::uint64_t total() const { return tp + fp + fn + tn; }
  std::uint64_t patients() const { return tp + fn; }
  std::uint64_t normals() const { return fp + tn; }
  std::uint64_t called_positive() const { return tp + fp; }
  std::uint64_t called_negative() const { return fn + tn; }

  /// Exchanges the roles of Patient and Normal.
  ConfusionMatrix swapped() const { return {tn, fn, fp, tp}; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Exact count ratio num/den with den > 0.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// Fixed-point rendering, rounded half to even on the exact rational.
  std::string to_string(int decimals = 6) const;
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Each ratio is empty when its denominator is zero.
struct EvaluationSummary {
  ConfusionMatrix matrix;
  std::optional<Ratio> sensitivity;
  std::optional<Ratio> specificity;
  std::optional<Ratio> ppv;
  std::optional<Ratio> npv;
};

using Predictor = std::function<int(const FeatureVector&)>;

/// Tallies predictor calls against dataset labels. Predictor errors
/// (e.g. DimensionMismatch) propagate.
ConfusionMatrix confusion(const Predictor& predictor, const LabeledDataset& dataset);
/// Raw-input classifier evaluated on an encoded dataset. If the dataset is
/// standardized its rows are mapped back to raw space first.
ConfusionMatrix confusion(const Classifier& classifier, const LabeledDataset& dataset);

EvaluationSummary summarize(const ConfusionMatrix& matrix);

/// Text rendering of an optional ratio: six decimals or "undefined".
std::string render_ratio(const std::optional<Ratio>& ratio, int decimals = 6);

/// Patient/Normal/Total table followed by the four predictive metrics.
std::string render_table(const EvaluationSummary& summary);

nlohmann::json evaluation_to_json(const EvaluationSummary& summary, const std::string& mode);
/// Ratios are recomputed from the stored counts.
EvaluationSummary evaluation_from_json(const nlohmann::json& document);

}  // namespace clindiag
