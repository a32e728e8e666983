#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "clindiag/encoding.hpp"
#include "clindiag/qp.hpp"
#include "clindiag/svm.hpp"

namespace clindiag {

inline constexpr int kModelFormatVersion = 1;

/// Shortest decimal string that parses back to the identical double.
std::string format_exact(double value);
double parse_exact(std::string_view text);

/// FNV-1a, 64-bit, rendered as 16 hex digits.
std::string checksum_hex(std::string_view bytes);

nlohmann::json model_to_json(const Classifier& classifier);
/// Throws VersionMismatch or CorruptModel.
Classifier model_from_json(const nlohmann::json& document);

void save_model(const Classifier& classifier, const std::filesystem::path& path);
/// Throws IoFailure, VersionMismatch or CorruptModel.
Classifier load_model(const std::filesystem::path& path);

nlohmann::json schema_to_json(const EncodingSchema& schema);
EncodingSchema schema_from_json(const nlohmann::json& document);
EncodingSchema load_schema(const std::filesystem::path& path);
void save_schema(const EncodingSchema& schema, const std::filesystem::path& path);

/// Debug dump of a dual solve: alphas, offset, objective, KKT violation.
nlohmann::json dual_diagnostics(const qp::QpProblem<double>& problem, const qp::DualSolution<double>& solution);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace clindiag
