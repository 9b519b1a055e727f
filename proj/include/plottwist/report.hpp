#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "plottwist/judge.hpp"

namespace plottwist::report {

using json = nlohmann::ordered_json;

/// "8.00 ± 0.00"
std::string mean_sd(double mean, double sd);

/// Fixed-point with `digits` decimals; null renders as "-".
std::string number(const json& value, int digits = 3);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Columns padded to their widest cell (counted in code points), first
  /// column left-aligned, the rest right-aligned.
  std::string to_text() const;
  /// RFC 4180 quoting where needed.
  std::string to_csv() const;
};

/// Per-model mean ± SD per aspect plus overall, rows in label order.
Table summary_table(std::span<const judge::SummaryRow> rows);
/// Same numbers with separate numeric mean and sd columns.
Table summary_csv_table(std::span<const judge::SummaryRow> rows);

/// Rows from a validation report JSON document.
Table validation_table(const json& report);
/// Rows from a stratified analysis JSON array.
Table stratified_table(const json& reports);

}  // namespace plottwist::report
