#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "clindiag/encoding.hpp"

namespace clindiag {

/// Comma-separated text with a header row. Fields may be double-quoted
/// ("" escapes a quote); blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// One record per row, every cell kept as text.
std::vector<ClinicalRecord> to_records(const CsvTable& table);

/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

}  // namespace clindiag
