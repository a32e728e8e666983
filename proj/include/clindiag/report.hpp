#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "clindiag/encoding.hpp"
#include "clindiag/metrics.hpp"
#include "clindiag/svm.hpp"

namespace clindiag {

struct RegistryEntry {
  Classifier model;
  EncodingSchema schema;
  EvaluationSummary evaluation;
};

/// Trained per-disease classifiers keyed (and therefore ordered) by disease name.
struct ModelRegistry {
  std::map<std::string, RegistryEntry> entries;

  /// Adds an entry after checking its schema/model dimensions and evaluation total.
  void add(const std::string& disease, RegistryEntry entry);
};

/// Manifest: {"diseases": [{"name", "model", "schema", "evaluation"}, ...]}.
/// Relative paths resolve against the manifest's directory.
ModelRegistry load_registry(const std::filesystem::path& manifest);

enum class Call { Positive, Negative };

struct DiagnosisRow {
  std::string disease;
  std::optional<Call> predicted;              // empty when the row is unavailable
  std::optional<double> confidence_percent;   // ppv*100 or npv*100; empty if undefined
  std::optional<Ratio> confidence_ratio;
  std::optional<double> decision_value;
  std::string error;                          // why the row is unavailable

  bool available() const { return predicted.has_value(); }
};

struct DiagnosticReport {
  std::vector<DiagnosisRow> rows;  // sorted by disease name
};

/// Encodes the record with each disease's schema and predicts. Per-disease
/// encoding failures mark that row unavailable and leave the others intact.
DiagnosticReport diagnose(const ModelRegistry& registry, const ClinicalRecord& record);

std::string render_report(const DiagnosticReport& report);
nlohmann::json report_to_json(const DiagnosticReport& report);

}  // namespace clindiag
