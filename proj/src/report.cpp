#include "tmine/report.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "tmine/errors.hpp"

namespace tmine {

namespace {

std::string_view kind_name(ReportKind kind) {
  switch (kind) {
    case ReportKind::kScore: return "score";
    case ReportKind::kClassify: return "classify";
    case ReportKind::kMine: return "mine";
  }
  return "score";
}

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) out.push_back(field);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line_no, "expected a number, got '" + s + "'");
  }
}

}  // namespace

std::optional<ExportFormat> parse_export_format(std::string_view text) {
  if (text == "tsv") return ExportFormat::kTsv;
  if (text == "json") return ExportFormat::kJson;
  return std::nullopt;
}

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string tsv_header(ReportKind kind) {
  std::string h =
      "relation\thead\ttail\tsentence\tcond_tail\tmarg_tail\tcond_head\tmarg_head\tlambda\tscore";
  if (kind == ReportKind::kClassify) h += "\tlabel\tpredicted";
  if (kind == ReportKind::kMine) h += "\trank";
  return h;
}

void write_report_tsv(const Report& report, std::ostream& out) {
  out << tsv_header(report.kind) << '\n';
  for (const auto& row : report.rows) {
    const auto& c = row.pmi.components;
    out << row.triple.relation << '\t' << join_words(row.triple.head) << '\t'
        << join_words(row.triple.tail) << '\t' << row.sentence.str() << '\t'
        << format_fixed(c.cond_tail) << '\t' << format_fixed(c.marg_tail) << '\t'
        << format_fixed(c.cond_head) << '\t' << format_fixed(c.marg_head) << '\t'
        << format_fixed(row.pmi.lambda) << '\t' << format_fixed(row.pmi.value);
    if (report.kind == ReportKind::kClassify) {
      out << '\t' << (row.label.value_or(false) ? 1 : 0) << '\t'
          << (row.predicted.value_or(false) ? 1 : 0);
    }
    if (report.kind == ReportKind::kMine) out << '\t' << row.rank.value_or(0);
    out << '\n';
  }
}

// Hand-written so numbers keep the fixed 6-decimal form.
void write_report_json(const Report& report, std::ostream& out) {
  out << "{\n  \"kind\": " << quote(std::string(kind_name(report.kind)))
      << ",\n  \"mode\": " << quote(std::string(to_string(report.mode)))
      << ",\n  \"lambda\": " << format_fixed(report.lambda)
      << ",\n  \"f1\": " << (report.f1 ? format_fixed(*report.f1) : "null");

  out << ",\n  \"grid\": [";
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    const auto& g = report.grid[i];
    out << (i ? ",\n    " : "\n    ") << "{\"lambda\": " << format_fixed(g.lambda)
        << ", \"aic\": " << (g.aic ? format_fixed(*g.aic) : "null");
    if (!g.failure.empty()) out << ", \"error\": " << quote(g.failure);
    out << "}";
  }
  out << (report.grid.empty() ? "]" : "\n  ]");

  out << ",\n  \"rows\": [";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    const auto& c = row.pmi.components;
    out << (i ? ",\n    " : "\n    ") << "{\"relation\": " << quote(row.triple.relation)
        << ", \"head\": " << quote(join_words(row.triple.head))
        << ", \"tail\": " << quote(join_words(row.triple.tail))
        << ", \"sentence\": " << quote(row.sentence.str()) << ", \"template\": "
        << (row.sentence.template_id
                ? quote(row.sentence.template_id->relation + "#" +
                        std::to_string(row.sentence.template_id->ordinal))
                : std::string("null"))
        << ", \"cond_tail\": " << format_fixed(c.cond_tail)
        << ", \"marg_tail\": " << format_fixed(c.marg_tail)
        << ", \"cond_head\": " << format_fixed(c.cond_head)
        << ", \"marg_head\": " << format_fixed(c.marg_head)
        << ", \"lambda\": " << format_fixed(row.pmi.lambda)
        << ", \"score\": " << format_fixed(row.pmi.value);
    if (row.label) out << ", \"label\": " << (*row.label ? "true" : "false");
    if (row.predicted) out << ", \"predicted\": " << (*row.predicted ? "true" : "false");
    if (row.rank) out << ", \"rank\": " << *row.rank;
    out << "}";
  }
  out << (report.rows.empty() ? "]" : "\n  ]");

  out << ",\n  \"failures\": [";
  for (std::size_t i = 0; i < report.failures.size(); ++i) {
    const auto& [triple, error] = report.failures[i];
    out << (i ? ",\n    " : "\n    ") << "{\"relation\": " << quote(triple.relation)
        << ", \"head\": " << quote(join_words(triple.head))
        << ", \"tail\": " << quote(join_words(triple.tail)) << ", \"error\": " << quote(error)
        << "}";
  }
  out << (report.failures.empty() ? "]" : "\n  ]") << "\n}\n";
}

void export_report(const Report& report, const std::filesystem::path& path, ExportFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  if (format == ExportFormat::kTsv) {
    write_report_tsv(report, out);
  } else {
    write_report_json(report, out);
  }
  out.flush();
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<ComponentRow> read_components_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_tabs(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  std::vector<std::size_t> idx;
  for (const char* name : {"relation", "head", "tail", "sentence", "cond_tail", "marg_tail",
                           "cond_head", "marg_head", "lambda", "score"}) {
    auto c = column(name);
    if (!c) throw ParseError(1, std::string("missing column ") + name);
    idx.push_back(*c);
  }
  auto label_col = column("label");

  std::vector<ComponentRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields");
    }
    ComponentRow row;
    try {
      row.triple = {normalize_surface(f[idx[1]]), f[idx[0]], normalize_surface(f[idx[2]]), std::nullopt};
    } catch (const EmptyPhraseError&) {
      throw ParseError(line_no, "empty head or tail");
    }
    row.sentence = f[idx[3]];
    row.components = {parse_double(f[idx[4]], line_no), parse_double(f[idx[5]], line_no),
                      parse_double(f[idx[6]], line_no), parse_double(f[idx[7]], line_no)};
    row.lambda = parse_double(f[idx[8]], line_no);
    row.score = parse_double(f[idx[9]], line_no);
    if (label_col) row.label = f[*label_col] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace tmine
