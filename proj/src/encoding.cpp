#include "clindiag/encoding.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "clindiag/error.hpp"

namespace clindiag {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string cell_text(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return std::string(trim(*s));
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), std::get<double>(cell));
  return std::string(buf, res.ptr);
}

bool is_blank(const Cell& cell) {
  const auto* s = std::get_if<std::string>(&cell);
  return s && trim(*s).empty();
}

double checked_finite(double v, const FeatureSpec& spec) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite value in column '" + spec.name + "'");
  return v;
}

double encode_cell(const Cell& cell, const FeatureSpec& spec) {
  if (spec.kind == FeatureKind::Numeric) {
    if (const auto* d = std::get_if<double>(&cell)) return checked_finite(*d, spec);
    const auto& text = std::get<std::string>(cell);
    auto parsed = parse_number(text);
    if (!parsed) throw Error(ErrorCode::NonNumericCell, "column '" + spec.name + "': '" + text + "' is not a number");
    return checked_finite(*parsed, spec);
  }
  const std::string key = cell_text(cell);
  for (const auto& stage : spec.stages) {
    if (stage.name == key) return checked_finite(stage.value, spec);
  }
  throw Error(ErrorCode::UnknownStage, "column '" + spec.name + "': unknown stage '" + key + "'");
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

void EncodingSchema::validate() const {
  if (features.empty()) throw Error(ErrorCode::InvalidSchema, "schema declares no features");
  std::set<std::string> names;
  for (const auto& f : features) {
    if (f.name.empty()) throw Error(ErrorCode::InvalidSchema, "feature with empty name");
    if (!names.insert(f.name).second) throw Error(ErrorCode::InvalidSchema, "duplicate feature '" + f.name + "'");
    if (f.impute && !std::isfinite(*f.impute))
      throw Error(ErrorCode::InvalidSchema, "feature '" + f.name + "' has a non-finite imputation constant");
    if (f.kind == FeatureKind::Numeric) {
      if (!f.stages.empty()) throw Error(ErrorCode::InvalidSchema, "numeric feature '" + f.name + "' lists stages");
      continue;
    }
    if (f.stages.empty()) throw Error(ErrorCode::InvalidSchema, "staged feature '" + f.name + "' has no stages");
    std::set<std::string> stage_names;
    std::set<double> stage_values;
    for (const auto& s : f.stages) {
      if (!std::isfinite(s.value))
        throw Error(ErrorCode::InvalidSchema, "stage '" + s.name + "' of '" + f.name + "' is not finite");
      if (!stage_names.insert(s.name).second)
        throw Error(ErrorCode::InvalidSchema, "duplicate stage '" + s.name + "' in '" + f.name + "'");
      if (!stage_values.insert(s.value).second)
        throw Error(ErrorCode::InvalidSchema, "stage numbers of '" + f.name + "' are not distinct");
    }
  }
  if (label_rule.label_column.empty()) throw Error(ErrorCode::InvalidSchema, "label column is not set");
  if (names.count(label_rule.label_column))
    throw Error(ErrorCode::InvalidSchema, "label column '" + label_rule.label_column + "' is also a feature");
  if (label_rule.positive_value == label_rule.negative_value)
    throw Error(ErrorCode::InvalidSchema, "positive and negative label values coincide");
}

FeatureVector Scaling::apply(const FeatureVector& raw) const {
  if (raw.size() != dims()) throw Error(ErrorCode::DimensionMismatch, "scaling dimension mismatch");
  return ((raw - mean).array() / stddev.array()).matrix();
}

FeatureVector Scaling::invert(const FeatureVector& scaled) const {
  if (scaled.size() != dims()) throw Error(ErrorCode::DimensionMismatch, "scaling dimension mismatch");
  return (scaled.array() * stddev.array()).matrix() + mean;
}

void Scaling::validate() const {
  if (stddev.size() != mean.size() || zero_variance.size() != static_cast<std::size_t>(mean.size()))
    throw Error(ErrorCode::InvalidArgument, "scaling vectors have inconsistent lengths");
  if (!(stddev.array() > 0.0).all()) throw Error(ErrorCode::InvalidArgument, "scaling deviation must be positive");
}

void LabeledDataset::validate() const {
  if (size() < 1) throw Error(ErrorCode::EmptyDataset, "dataset is empty");
  if (labels.size() != size()) throw Error(ErrorCode::DimensionMismatch, "vector and label counts differ");
  if (!((labels.array() == 1.0) || (labels.array() == -1.0)).all())
    throw Error(ErrorCode::InvalidArgument, "labels must be +1 or -1");
  if (!vectors.allFinite()) throw Error(ErrorCode::NonFiniteValue, "dataset holds non-finite components");
  if (scaling) {
    scaling->validate();
    if (scaling->dims() != dims()) throw Error(ErrorCode::DimensionMismatch, "scaling has wrong dimension");
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<Eigen::Index>& indices) const {
  LabeledDataset out;
  out.vectors.resize(static_cast<Eigen::Index>(indices.size()), dims());
  out.labels.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto i = indices[r];
    out.vectors.row(static_cast<Eigen::Index>(r)) = vectors.row(i);
    out.labels(static_cast<Eigen::Index>(r)) = labels(i);
  }
  out.scaling = scaling;
  return out;
}

FeatureVector encode_record(const ClinicalRecord& record, const EncodingSchema& schema) {
  FeatureVector x(schema.dims());
  for (Eigen::Index i = 0; i < schema.dims(); ++i) {
    const auto& spec = schema.features[static_cast<std::size_t>(i)];
    auto it = record.values.find(spec.name);
    const bool absent = it == record.values.end() || is_blank(it->second);
    if (absent) {
      if (spec.impute) {
        x(i) = *spec.impute;
        continue;
      }
      if (it == record.values.end())
        throw Error(ErrorCode::MissingColumn, "record lacks column '" + spec.name + "'");
      throw Error(ErrorCode::MissingValue, "empty cell in column '" + spec.name + "'");
    }
    x(i) = encode_cell(it->second, spec);
  }
  return x;
}

LabeledDataset encode_dataset(const std::vector<ClinicalRecord>& records, const EncodingSchema& schema) {
  schema.validate();
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no records to encode");
  const auto& rule = schema.label_rule;
  LabeledDataset out;
  out.vectors.resize(static_cast<Eigen::Index>(records.size()), schema.dims());
  out.labels.resize(static_cast<Eigen::Index>(records.size()));
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    try {
      out.vectors.row(row) = encode_record(records[r], schema).transpose();
      auto it = records[r].values.find(rule.label_column);
      if (it == records[r].values.end())
        throw Error(ErrorCode::MissingColumn, "record lacks label column '" + rule.label_column + "'");
      const std::string value = cell_text(it->second);
      if (value == rule.positive_value) {
        out.labels(row) = 1.0;
      } else if (value == rule.negative_value) {
        out.labels(row) = -1.0;
      } else {
        throw Error(ErrorCode::UnknownLabelValue, "label '" + value + "' is neither '" + rule.positive_value +
                                                      "' nor '" + rule.negative_value + "'");
      }
    } catch (const Error& e) {
      throw Error(e.code(), "record " + std::to_string(r) + ": " + e.what(), r);
    }
  }
  return out;
}

LabeledDataset standardize(const LabeledDataset& dataset) {
  if (dataset.scaling) throw Error(ErrorCode::AlreadyStandardized, "dataset is already standardized");
  if (dataset.size() < 2) throw Error(ErrorCode::DatasetTooSmall, "standardization needs at least two vectors");
  const auto l = static_cast<double>(dataset.size());
  Scaling scaling;
  scaling.mean = dataset.vectors.colwise().mean().transpose();
  const Eigen::MatrixXd centered = dataset.vectors.rowwise() - scaling.mean.transpose();
  scaling.stddev = (centered.colwise().squaredNorm().transpose() / l).cwiseSqrt();
  scaling.zero_variance.assign(static_cast<std::size_t>(dataset.dims()), false);
  for (Eigen::Index j = 0; j < dataset.dims(); ++j) {
    if (scaling.stddev(j) <= 0.0) {
      scaling.stddev(j) = 1.0;
      scaling.zero_variance[static_cast<std::size_t>(j)] = true;
    }
  }
  LabeledDataset out;
  out.vectors = centered.array().rowwise() / scaling.stddev.transpose().array();
  out.labels = dataset.labels;
  out.scaling = std::move(scaling);
  return out;
}

}  // namespace clindiag
