#include "clindiag/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "clindiag/error.hpp"

namespace clindiag {

using nlohmann::json;

std::string Ratio::to_string(int decimals) const {
  // Counts are far below 2^64 / 10^decimals in practice; the arithmetic is
  // done in 128 bits anyway.
  unsigned __int128 scale = 1;
  for (int d = 0; d < decimals; ++d) scale *= 10;
  const unsigned __int128 scaled = static_cast<unsigned __int128>(num) * scale;
  unsigned __int128 q = scaled / den;
  const unsigned __int128 r = scaled % den;
  const unsigned __int128 twice = r * 2;
  if (twice > den || (twice == den && (q & 1) != 0)) ++q;

  const auto whole = static_cast<std::uint64_t>(q / scale);
  auto frac = static_cast<std::uint64_t>(q % scale);
  std::string out = std::to_string(whole);
  if (decimals > 0) {
    std::string digits(static_cast<std::size_t>(decimals), '0');
    for (int d = decimals - 1; d >= 0; --d) {
      digits[static_cast<std::size_t>(d)] = static_cast<char>('0' + frac % 10);
      frac /= 10;
    }
    out += "." + digits;
  }
  return out;
}

ConfusionMatrix confusion(const Predictor& predictor, const LabeledDataset& dataset) {
  if (dataset.size() < 1) throw Error(ErrorCode::EmptyDataset, "cannot evaluate on an empty dataset");
  ConfusionMatrix m;
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    const bool positive_call = predictor(dataset.row(i)) > 0;
    const bool patient = dataset.labels(i) > 0;
    if (patient) (positive_call ? m.tp : m.fn) += 1;
    else (positive_call ? m.fp : m.tn) += 1;
  }
  return m;
}

ConfusionMatrix confusion(const Classifier& classifier, const LabeledDataset& dataset) {
  if (dataset.scaling) {
    const Scaling& s = *dataset.scaling;
    return confusion([&](const FeatureVector& x) { return classify(classifier, s.invert(x)); }, dataset);
  }
  return confusion([&](const FeatureVector& x) { return classify(classifier, x); }, dataset);
}

namespace {

std::optional<Ratio> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return Ratio{num, den};
}

}  // namespace

EvaluationSummary summarize(const ConfusionMatrix& m) {
  if (m.total() == 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
  return {m, ratio(m.tp, m.tp + m.fn), ratio(m.tn, m.tn + m.fp), ratio(m.tp, m.tp + m.fp), ratio(m.tn, m.tn + m.fn)};
}

std::string render_ratio(const std::optional<Ratio>& r, int decimals) {
  return r ? r->to_string(decimals) : std::string("undefined");
}

std::string render_table(const EvaluationSummary& s) {
  const auto& m = s.matrix;
  char line[128];
  std::ostringstream out;
  std::snprintf(line, sizeof(line), "%-10s%10s%10s%10s\n", "", "Patient", "Normal", "Total");
  out << line;
  auto row = [&](const char* name, std::uint64_t a, std::uint64_t b) {
    std::snprintf(line, sizeof(line), "%-10s%10llu%10llu%10llu\n", name, static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b), static_cast<unsigned long long>(a + b));
    out << line;
  };
  row("Positive", m.tp, m.fp);
  row("Negative", m.fn, m.tn);
  row("Total", m.patients(), m.normals());
  out << "\n";
  out << "Sensitivity: " << render_ratio(s.sensitivity) << "\n";
  out << "Specificity: " << render_ratio(s.specificity) << "\n";
  out << "Predictive value for positive: " << render_ratio(s.ppv) << "\n";
  out << "Predictive value for negative: " << render_ratio(s.npv) << "\n";
  return out.str();
}

namespace {

json ratio_json(const std::optional<Ratio>& r) {
  if (!r) return "undefined";
  return {{"numerator", r->num}, {"denominator", r->den}, {"value", r->to_string(6)}};
}

}  // namespace

json evaluation_to_json(const EvaluationSummary& s, const std::string& mode) {
  const auto& m = s.matrix;
  return {{"mode", mode},
          {"matrix", {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}}},
          {"totals",
           {{"patients", m.patients()},
            {"normals", m.normals()},
            {"positive", m.called_positive()},
            {"negative", m.called_negative()},
            {"all", m.total()}}},
          {"sensitivity", ratio_json(s.sensitivity)},
          {"specificity", ratio_json(s.specificity)},
          {"ppv", ratio_json(s.ppv)},
          {"npv", ratio_json(s.npv)}};
}

EvaluationSummary evaluation_from_json(const json& document) {
  try {
    const auto& m = document.at("matrix");
    ConfusionMatrix matrix{m.at("tp").get<std::uint64_t>(), m.at("fp").get<std::uint64_t>(),
                           m.at("fn").get<std::uint64_t>(), m.at("tn").get<std::uint64_t>()};
    return summarize(matrix);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed evaluation: ") + e.what());
  }
}

}  // namespace clindiag
