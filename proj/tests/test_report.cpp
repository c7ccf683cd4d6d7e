#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "langmem/csv.hpp"
#include "langmem/error.hpp"
#include "langmem/report.hpp"

using namespace langmem;
using namespace langmem::report;
namespace fs = std::filesystem;

namespace {

const std::string kFamily = LANGMEM_FIXTURES "/family/";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("langmem_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<csv::Row> rows_of(const std::string& text) {
  std::istringstream in(text);
  return csv::read_all(in);
}

RunConfig scored(const fs::path& dir) {
  RunConfig c;
  c.command = "score";
  c.records = kFamily + "records_50.jsonl";
  c.prompt_length = 50;
  const auto bundle = run(c);
  write_bundle(bundle, dir);
  RunConfig next;
  next.scores = (dir / "scores_long.csv").string();
  next.similarity = kFamily + "similarity.csv";
  next.tokens = kFamily + "tokens.csv";
  return next;
}

}  // namespace

TEST_CASE("score tables") {
  RunConfig c;
  c.command = "score";
  c.records = kFamily + "records_50.jsonl";
  const auto b = run(c);
  const auto wide = rows_of(b.tables.at("scores_wide.csv"));
  CHECK(wide[0] == csv::Row{"language", "EM (%)", "PM", "RM (B)", "RM (R)"});
  CHECK(wide.size() == 25);
  const auto summary = rows_of(b.tables.at("summary.csv"));
  CHECK(summary[0][0] == "Model");
  CHECK(summary[1][1] == "--");
  CHECK(b.tables.count("signals/EM.csv") == 1);

  c.suffix_length = 10;
  CHECK_THROWS_AS(run(c), Error);
  c.suffix_length = 15;
  c.prompt_length = 100;
  CHECK_THROWS_AS(run(c), Error);
}

TEST_CASE("correlate layout") {
  auto c = scored(scratch("corr"));
  c.command = "correlate";
  c.theta = 0.5;
  const auto b = run(c);
  const auto t = rows_of(b.tables.at("correlation.csv"));
  REQUIRE(t.size() == 5);
  CHECK(t[0] == csv::Row{"Mem. Metric", "r", "rho_G"});
  CHECK(t[1][0] == "EM");
  CHECK(t[2][0] == "PM");
  CHECK(t[3][0] == "RM (BLEU)");
  CHECK(t[4][0] == "RM (Rouge-L)");
}

TEST_CASE("undefined cells") {
  auto c = scored(scratch("undef"));
  c.command = "correlate";
  c.theta = 0.99;  // no edges
  const auto t = rows_of(run(c).tables.at("correlation.csv"));
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i][2] == "undefined");
}

TEST_CASE("sweep layout") {
  auto c = scored(scratch("sweep"));
  c.command = "sweep";
  c.model = "synthetic";
  const auto b = run(c);
  const auto t = rows_of(b.tables.at("sweep_table.csv"));
  REQUIRE(t.size() == 11);
  CHECK(t[0] == csv::Row{"synthetic", "0.31", "0.33", "0.35", "0.37", "0.39", "0.41", "0.43",
                         "0.45"});
  CHECK(t[1][0] == "# Subgraph");
  CHECK(t[2][0] == "# Single Point");
  CHECK(t[3][0] == "EM Intra");
  CHECK(t[4][0] == "EM Cross");
  CHECK(t[9][0] == "RM (R) Intra");
  CHECK(t[10][0] == "RM (R) Cross");
  for (const auto& row : t) CHECK(row.size() == 9);
}

TEST_CASE("manifest") {
  auto c = scored(scratch("manifest"));
  c.command = "correlate";
  c.theta = 0.5;
  const auto b = run(c);
  CHECK(b.manifest["command"] == "correlate");
  CHECK(b.manifest["config"]["theta"] == 0.5);
  CHECK(b.manifest["inputs"].size() == 3);
  CHECK(b.manifest["outputs"][0]["path"] == "correlation.csv");
  CHECK(b.manifest["outputs"][0]["sha256"] == text_digest(b.tables.at("correlation.csv")));
  CHECK(text_digest("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("report command writes identical bundles") {
  RunConfig base;
  const auto c = load_report_config(kFamily + "report.json", base);
  CHECK(c.record_runs.size() == 2);
  CHECK(fs::exists(c.similarity));
  const auto a = run(c);
  const auto b = run(c);
  CHECK(a.tables == b.tables);
  CHECK(a.manifest == b.manifest);
  CHECK(a.tables.count("consistency.csv") == 1);
  CHECK(a.tables.count("sweep/50_sweep_table.csv") == 1);
}

TEST_CASE("filter-corpus streams a deterministic sample") {
  RunConfig c;
  c.command = "filter-corpus";
  c.passages = LANGMEM_FIXTURES "/passages.jsonl";
  c.quota = 5;
  c.buffer_capacity = 4;
  c.seed = 17;
  c.out_dir = scratch("fc1").string();
  const auto a = run(c);
  c.out_dir = scratch("fc2").string();
  const auto b = run(c);
  CHECK(a.streamed == b.streamed);
  CHECK(a.streamed.size() == 3);
  const auto stats = rows_of(a.tables.at("filter_stats.csv"));
  CHECK(stats.size() == 1 + 3 * 8);
  c.seed = 18;
  c.out_dir = scratch("fc3").string();
  CHECK(run(c).streamed != a.streamed);
}

TEST_CASE("configuration errors") {
  RunConfig c;
  c.command = "graph";
  c.similarity = kFamily + "similarity.csv";
  CHECK_THROWS_AS(validate(c), ConfigError);  // no theta
  c.theta = 1.5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.theta = 0.5;
  CHECK_NOTHROW(validate(c));
  c.similarity = "/missing.csv";
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.command = "nope";
  CHECK_THROWS_AS(validate(c), ConfigError);

  const auto dir = scratch("cfg");
  std::ofstream(dir / "bad.json") << R"({"unknown_key": 1})";
  CHECK_THROWS_AS(load_report_config((dir / "bad.json").string(), {}), ConfigError);
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(load_report_config((dir / "broken.json").string(), {}), ConfigError);
}

TEST_CASE("language sets must agree") {
  const auto dir = scratch("mismatch");
  std::ofstream(dir / "tokens.csv") << "language,value\nf0l0,1\nf0l1,2\nzz,3\n";
  auto c = scored(dir);
  c.command = "correlate";
  c.theta = 0.5;
  c.tokens = (dir / "tokens.csv").string();
  try {
    run(c);
    FAIL("expected LanguageSetMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LanguageSetMismatch);
  }
}
