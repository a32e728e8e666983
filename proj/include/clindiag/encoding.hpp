#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace clindiag {

enum class FeatureKind { Numeric, Staged };

/// One named stage of a staged test and the number chosen to represent it.
struct Stage {
  std::string name;
  double value = 0.0;
};

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<Stage> stages;  // non-empty iff kind == Staged
  // Substituted for an absent column or an empty cell. Unset means missing
  // data is an error.
  std::optional<double> impute;

  static FeatureSpec numeric(std::string name) { return {std::move(name), FeatureKind::Numeric, {}, std::nullopt}; }
  static FeatureSpec staged(std::string name, std::vector<Stage> stages) {
    return {std::move(name), FeatureKind::Staged, std::move(stages), std::nullopt};
  }
};

struct LabelRule {
  std::string label_column;
  std::string positive_value;
  std::string negative_value;
};

/// Ordered per-column rules. Feature order is the component order of every
/// encoded vector.
struct EncodingSchema {
  std::vector<FeatureSpec> features;
  LabelRule label_rule;

  Eigen::Index dims() const { return static_cast<Eigen::Index>(features.size()); }

  /// Throws Error(InvalidSchema) when an invariant is broken.
  void validate() const;
};

using Cell = std::variant<std::string, double>;

struct ClinicalRecord {
  std::map<std::string, Cell> values;
};

using FeatureVector = Eigen::VectorXd;

/// Per-dimension affine transform x -> (x - mean) / stddev.
struct Scaling {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<bool> zero_variance;

  Eigen::Index dims() const { return mean.size(); }
  FeatureVector apply(const FeatureVector& raw) const;
  FeatureVector invert(const FeatureVector& scaled) const;
  void validate() const;
};

/// Rows of `vectors` are the encoded samples x_i; `labels` holds y_i = +/-1.
struct LabeledDataset {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd labels;
  std::optional<Scaling> scaling;

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dims() const { return vectors.cols(); }
  FeatureVector row(Eigen::Index i) const { return vectors.row(i).transpose(); }
  Eigen::Index positives() const { return (labels.array() > 0).count(); }
  Eigen::Index negatives() const { return (labels.array() < 0).count(); }

  void validate() const;
  /// Rows selected by `indices`, in that order; scaling is carried over.
  LabeledDataset subset(const std::vector<Eigen::Index>& indices) const;
};

FeatureVector encode_record(const ClinicalRecord& record, const EncodingSchema& schema);

/// Errors from individual records are rethrown with the record index attached.
LabeledDataset encode_dataset(const std::vector<ClinicalRecord>& records, const EncodingSchema& schema);

/// Population-convention standardization (divisor l). Zero-variance
/// dimensions are centered and keep stddev 1.
LabeledDataset standardize(const LabeledDataset& dataset);

/// Parses a cell holding a plain decimal number. Surrounding blanks are ignored.
std::optional<double> parse_number(std::string_view text);

}  // namespace clindiag
