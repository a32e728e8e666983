#include "clindiag/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "clindiag/error.hpp"
#include "clindiag/model_io.hpp"

namespace clindiag {

using nlohmann::json;

void ModelRegistry::add(const std::string& disease, RegistryEntry entry) {
  if (disease.empty()) throw Error(ErrorCode::InvalidArgument, "registry entry needs a disease name");
  entry.schema.validate();
  if (entry.schema.dims() != classifier_dims(entry.model))
    throw Error(ErrorCode::DimensionMismatch, "'" + disease + "': schema has " + std::to_string(entry.schema.dims()) +
                                                  " features but the model expects " +
                                                  std::to_string(classifier_dims(entry.model)));
  if (entry.evaluation.matrix.total() < 1)
    throw Error(ErrorCode::EmptyMatrix, "'" + disease + "': evaluation has no counts");
  if (!entries.emplace(disease, std::move(entry)).second)
    throw Error(ErrorCode::InvalidArgument, "duplicate disease '" + disease + "' in registry");
}

ModelRegistry load_registry(const std::filesystem::path& manifest) {
  json doc = json::parse(read_text_file(manifest), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ParseError, "'" + manifest.string() + "' is not valid JSON");
  const auto base = manifest.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  ModelRegistry registry;
  try {
    for (const auto& d : doc.at("diseases")) {
      const auto name = d.at("name").get<std::string>();
      RegistryEntry entry{load_model(resolve(d.at("model").get<std::string>())),
                          load_schema(resolve(d.at("schema").get<std::string>())),
                          evaluation_from_json(json::parse(read_text_file(resolve(d.at("evaluation").get<std::string>()))))};
      registry.add(name, std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed registry: ") + e.what());
  }
  if (registry.entries.empty()) throw Error(ErrorCode::EmptyRegistry, "registry lists no diseases");
  return registry;
}

DiagnosticReport diagnose(const ModelRegistry& registry, const ClinicalRecord& record) {
  if (registry.entries.empty()) throw Error(ErrorCode::EmptyRegistry, "registry is empty");
  DiagnosticReport report;
  for (const auto& [disease, entry] : registry.entries) {
    DiagnosisRow row;
    row.disease = disease;
    try {
      const FeatureVector x = encode_record(record, entry.schema);
      const double decision = classifier_decision(entry.model, x);
      const bool positive = classify(entry.model, x) > 0;
      row.predicted = positive ? Call::Positive : Call::Negative;
      row.decision_value = decision;
      row.confidence_ratio = positive ? entry.evaluation.ppv : entry.evaluation.npv;
      if (row.confidence_ratio) row.confidence_percent = row.confidence_ratio->value() * 100.0;
    } catch (const Error& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

// 100 * num / den with four decimals, so the digits are exactly those of
// the six-decimal predictive value.
std::string percent_text(const Ratio& r) {
  Ratio scaled{r.num * 100, r.den};
  return scaled.to_string(4);
}

}  // namespace

std::string render_report(const DiagnosticReport& report) {
  std::size_t width = 7;
  for (const auto& row : report.rows) width = std::max(width, row.disease.size());
  std::ostringstream out;
  out << "Statistical Diagnosis\n";
  for (const auto& row : report.rows) {
    out << row.disease << std::string(width - row.disease.size() + 2, ' ');
    if (!row.available()) {
      out << "unavailable (" << row.error << ")\n";
      continue;
    }
    const bool positive = *row.predicted == Call::Positive;
    out << (positive ? "Positive" : "Negative") << "  ";
    char buf[64];
    if (row.confidence_ratio) {
      const std::string pct = percent_text(*row.confidence_ratio);
      std::snprintf(buf, sizeof(buf), "%9s %%", pct.c_str());
      out << buf << (positive ? " chance of disease" : " chance of no disease");
    } else {
      out << "undefined confidence";
    }
    std::snprintf(buf, sizeof(buf), "  (decision %.6f)", *row.decision_value);
    out << buf << "\n";
  }
  return out.str();
}

json report_to_json(const DiagnosticReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r = {{"disease", row.disease}};
    if (!row.available()) {
      r["available"] = false;
      r["error"] = row.error;
    } else {
      r["available"] = true;
      r["predicted"] = *row.predicted == Call::Positive ? "Positive" : "Negative";
      r["confidence_percent"] = row.confidence_percent ? json(*row.confidence_percent) : json("undefined");
      r["decision_value"] = *row.decision_value;
    }
    rows.push_back(std::move(r));
  }
  return {{"rows", rows}};
}

}  // namespace clindiag
