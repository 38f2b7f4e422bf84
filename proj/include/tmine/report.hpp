#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tmine/pipeline.hpp"

namespace tmine {

enum class ExportFormat { kTsv, kJson };

std::optional<ExportFormat> parse_export_format(std::string_view text);

// Fixed 6-decimal rendering used by every export.
std::string format_fixed(double value);

// TSV columns: relation head tail sentence cond_tail marg_tail cond_head
// marg_head lambda score, then label predicted (classify) or rank (mine).
std::string tsv_header(ReportKind kind);

void write_report_tsv(const Report& report, std::ostream& out);
void write_report_json(const Report& report, std::ostream& out);
void export_report(const Report& report, const std::filesystem::path& path, ExportFormat format);

// Rows read back from a TSV export; enough to re-run the lambda search.
struct ComponentRow {
  Triple triple;
  std::string sentence;
  PmiComponents components;
  double lambda = 0.0;
  double score = 0.0;
  std::optional<bool> label;
};

std::vector<ComponentRow> read_components_tsv(std::istream& in);

}  // namespace tmine
