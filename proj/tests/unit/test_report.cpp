#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "synthetic.hpp"
#include "tmine/errors.hpp"
#include "tmine/report.hpp"

using namespace tmine;

namespace {

Report sample_report(ReportKind kind) {
  auto pool = synthetic::valid_pool(8);
  synthetic::BoostBackend masked(pool);
  ScoringContext ctx;
  ctx.masked = &masked;
  RunConfig cfg;
  cfg.mode = GenerationMode::kConcat;
  if (kind == ReportKind::kMine) return run_task2(cfg, pool, 5, ctx);
  if (kind == ReportKind::kClassify) return run_task1(cfg, build_balanced_dataset(pool, 1), ctx);
  return run_scoring(cfg, pool, ctx);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("fixed float formatting") {
  CHECK(format_fixed(1.5) == "1.500000");
  CHECK(format_fixed(-0.1234567) == "-0.123457");
  CHECK(parse_export_format("json") == ExportFormat::kJson);
  CHECK_FALSE(parse_export_format("xml"));
}

TEST_CASE("headers") {
  CHECK(tsv_header(ReportKind::kScore) ==
        "relation\thead\ttail\tsentence\tcond_tail\tmarg_tail\tcond_head\tmarg_head\tlambda\tscore");
  CHECK(tsv_header(ReportKind::kClassify).ends_with("\tscore\tlabel\tpredicted"));
  CHECK(tsv_header(ReportKind::kMine).ends_with("\tscore\trank"));
}

TEST_CASE("empty report is header only") {
  Report r;
  r.kind = ReportKind::kMine;
  std::ostringstream out;
  write_report_tsv(r, out);
  CHECK(out.str() == tsv_header(ReportKind::kMine) + "\n");
  std::ostringstream js;
  write_report_json(r, js);
  auto doc = nlohmann::json::parse(js.str());
  CHECK(doc["rows"].empty());
  CHECK(doc["f1"].is_null());
}

TEST_CASE("exports are byte-identical across runs and parse back") {
  auto dir = std::filesystem::temp_directory_path() / "tmine_report_test";
  std::filesystem::create_directories(dir);
  for (auto kind : {ReportKind::kScore, ReportKind::kClassify, ReportKind::kMine}) {
    for (auto fmt : {ExportFormat::kTsv, ExportFormat::kJson}) {
      export_report(sample_report(kind), dir / "a", fmt);
      export_report(sample_report(kind), dir / "b", fmt);
      CHECK(slurp(dir / "a") == slurp(dir / "b"));
      if (fmt == ExportFormat::kJson) CHECK(nlohmann::json::accept(slurp(dir / "a")));
    }
  }
  auto report = sample_report(ReportKind::kClassify);
  std::ostringstream out;
  write_report_tsv(report, out);
  std::istringstream in(out.str());
  auto rows = read_components_tsv(in);
  REQUIRE(rows.size() == report.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].triple.same_content(report.rows[i].triple));
    CHECK(rows[i].label == report.rows[i].label);
    CHECK(rows[i].components.cond_tail == doctest::Approx(report.rows[i].pmi.components.cond_tail).epsilon(1e-5));
    CHECK(rows[i].score == doctest::Approx(rows[i].components.combine(rows[i].lambda)).epsilon(1e-5));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("component reader errors") {
  std::istringstream missing("relation\thead\n");
  CHECK_THROWS_AS(read_components_tsv(missing), ParseError);
  std::istringstream bad(tsv_header(ReportKind::kScore) + "\nIsA\ta\tb\ta is b\tx\t1\t1\t1\t1\t1\n");
  CHECK_THROWS_AS(read_components_tsv(bad), ParseError);
}
