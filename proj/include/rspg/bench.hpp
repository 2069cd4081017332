#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rspg/problems.hpp"

namespace rspg {

// Grid description for one experiment: problem scenario x algorithm list x
// oracle budgets, with seeded replications.
struct ExperimentConfig {
  std::string scenario = "lsq";
  std::string problem = "least_squares";  // "least_squares" | "s3vm"
  std::size_t n = 100;
  double noise_sigma = 0.1;
  double sparsity = 0.05;
  ScadParams scad;
  double lambda1 = 1.0, lambda2 = 0.5, lambda3 = 0.5;
  double delta = 0.1;
  std::vector<std::string> algorithms = {"RSPG", "2-RSPG", "2-RSPG-V"};
  std::vector<std::uint64_t> budgets = {1000, 5000, 25000};
  std::uint64_t replications = 20;
  std::uint64_t s_runs = 5;        // S
  double t_fraction = 0.5;         // post-phase T = max(1, floor(N * fraction))
  std::uint64_t k_eval = 75000;    // K
  std::uint64_t n0 = 200;          // pilot sample size
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

ExperimentConfig config_from_string(const std::string& text);
std::string config_to_string(const ExperimentConfig& config);

struct ReportRow {
  std::string scenario;
  std::size_t n = 0;
  double noise = 0.0;
  std::string algorithm;
  std::uint64_t ns = 0;
  std::uint64_t replication = 0;
  double mapping_norm_sq = 0.0;
  double objective = 0.0;
  std::optional<double> zero_ratio;
  std::uint64_t sfo_calls = 0;   // optimization phase only
  std::uint64_t post_calls = 0;  // post-selection phase
  double wall_ms = 0.0;          // always 0 in canonical reports
};

struct SkippedCell {
  std::string algorithm;
  std::uint64_t ns = 0;
  std::string reason;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<SkippedCell> skipped;
  double wall_ms_total = 0.0;  // informational, never serialized
};

ExperimentReport run_experiment(const ExperimentConfig& config,
                                unsigned threads = 1);

struct SummaryRow {
  std::string scenario;
  std::size_t n = 0;
  double noise = 0.0;
  std::uint64_t ns = 0;
  std::string algorithm;
  std::uint64_t replications = 0;
  double mean_mapping = 0.0;
  std::optional<double> var_mapping;  // absent for a single replication
  double mean_objective = 0.0;
  std::optional<double> var_objective;
  std::optional<double> mean_zero;
  std::optional<double> var_zero;
};

// One row per (scenario, NS, algorithm); unbiased sample variance.
std::vector<SummaryRow> summarize(const ExperimentReport& report);

std::string report_to_csv(const ExperimentReport& report);
ExperimentReport report_from_csv(const std::string& text);
// JSON reports carry the per-cell aggregates; loading recomputes them from
// the rows and rejects the file on any mismatch.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

std::string summary_to_csv(const std::vector<SummaryRow>& rows);
std::string summary_to_json(const std::vector<SummaryRow>& rows);
// Human-readable table, algorithms as columns, mean and var. lines per cell.
std::string summary_table(const std::vector<SummaryRow>& rows);

}  // namespace rspg
