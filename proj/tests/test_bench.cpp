#include <stdexcept>

#include <doctest.h>

#include "rspg/bench.hpp"

using namespace rspg;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.scenario = "unit";
  config.problem = "least_squares";
  config.n = 12;
  config.algorithms = {"RSPG", "2-RSPG"};
  config.budgets = {200, 600};
  config.replications = 2;
  config.s_runs = 2;
  config.k_eval = 500;
  config.n0 = 50;
  config.seed = 31;
  return config;
}

}  // namespace

TEST_CASE("config text round-trips") {
  const auto config = small_config();
  const auto loaded = config_from_string(config_to_string(config));
  CHECK(loaded.scenario == config.scenario);
  CHECK(loaded.n == config.n);
  CHECK(loaded.algorithms == config.algorithms);
  CHECK(loaded.budgets == config.budgets);
  CHECK(loaded.seed == config.seed);
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS_AS(config_from_string("scenario = x\nbogus_key = 1\n"),
                  std::invalid_argument);
}

TEST_CASE("summary of a two-point sample") {
  ExperimentReport report;
  for (std::uint64_t rep = 0; rep < 2; ++rep) {
    ReportRow row;
    row.scenario = "s";
    row.n = 4;
    row.algorithm = "RSPG";
    row.ns = 100;
    row.replication = rep;
    row.mapping_norm_sq = rep == 0 ? 1.0 : 3.0;
    row.objective = rep == 0 ? 1.0 : 3.0;
    report.rows.push_back(row);
  }
  const auto summary = summarize(report);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].mean_mapping == doctest::Approx(2.0));
  REQUIRE(summary[0].var_mapping.has_value());
  CHECK(*summary[0].var_mapping == doctest::Approx(2.0));
  CHECK(!summary[0].mean_zero.has_value());
}

TEST_CASE("single replication reports variance as absent") {
  ExperimentReport report;
  ReportRow row;
  row.scenario = "s";
  row.algorithm = "RSPG";
  row.ns = 10;
  row.mapping_norm_sq = 0.5;
  report.rows.push_back(row);
  const auto summary = summarize(report);
  REQUIRE(summary.size() == 1);
  CHECK(!summary[0].var_mapping.has_value());
}

TEST_CASE("csv header is pinned") {
  const ExperimentReport report;
  const std::string csv = report_to_csv(report);
  CHECK(csv.rfind("scenario,n,noise,algorithm,NS,replication,mapping_norm_sq,"
                  "objective,zero_ratio,sfo_calls,post_calls,wall_ms",
                  0) == 0);
}

TEST_CASE("experiment reports round-trip through csv and json") {
  const auto report = run_experiment(small_config(), 2);
  CHECK(report.skipped.empty());
  CHECK(!report.rows.empty());
  for (const auto& row : report.rows) {
    CHECK(row.sfo_calls <= row.ns);
    CHECK(row.wall_ms == 0.0);
  }

  const std::string csv = report_to_csv(report);
  const auto from_csv = report_from_csv(csv);
  CHECK(report_to_csv(from_csv) == csv);

  const std::string json = report_to_json(report);
  const auto from_json = report_from_json(json);
  CHECK(report_to_json(from_json) == json);

  CHECK(summary_to_csv(summarize(from_csv)) ==
        summary_to_csv(summarize(report)));
}

TEST_CASE("corrupted json aggregates are rejected on load") {
  auto config = small_config();
  config.budgets = {200};
  config.algorithms = {"RSPG"};
  const auto report = run_experiment(config, 1);
  std::string json = report_to_json(report);
  const auto pos = json.find("\"mean_mapping_norm_sq\"");
  REQUIRE(pos != std::string::npos);
  json.replace(pos, 22, "\"mean_mapping_norm_sq_x\"");
  CHECK_THROWS(report_from_json(json));
}

TEST_CASE("impossible cells are skipped and recorded") {
  auto config = small_config();
  config.problem = "s3vm";
  config.scenario = "svm-unit";
  config.algorithms = {"PG", "RSPG"};  // PG needs an exact gradient
  config.budgets = {200};
  const auto report = run_experiment(config, 1);
  REQUIRE(report.skipped.size() == 1);
  CHECK(report.skipped[0].algorithm == "PG");
  bool has_rspg = false;
  for (const auto& row : report.rows) has_rspg = has_rspg || row.algorithm == "RSPG";
  CHECK(has_rspg);
}

TEST_CASE("summary table pivots algorithms into columns") {
  const auto report = run_experiment(small_config(), 2);
  const std::string table = summary_table(summarize(report));
  CHECK(table.find("RSPG") != std::string::npos);
  CHECK(table.find("2-RSPG") != std::string::npos);
  CHECK(table.find("mean") != std::string::npos);
}
