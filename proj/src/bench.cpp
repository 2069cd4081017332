#include "rspg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "rspg/solvers.hpp"

namespace rspg {

namespace {

using nlohmann::json;

const char* const kCsvHeader =
    "scenario,n,noise,algorithm,NS,replication,mapping_norm_sq,objective,"
    "zero_ratio,sfo_calls,post_calls,wall_ms";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trimmed(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  const auto last = s.find_last_not_of(" \t\r");
  s.erase(last == std::string::npos ? 0 : last + 1);
  return s;
}

const std::set<std::string> kKnownAlgorithms = {"PG", "RSPG", "2-RSPG",
                                                "2-RSPG-V", "RSPGF"};

bool row_key_less(const ReportRow& a, const ReportRow& b) {
  return std::tie(a.scenario, a.algorithm, a.ns, a.replication) <
         std::tie(b.scenario, b.algorithm, b.ns, b.replication);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (problem != "least_squares" && problem != "s3vm") {
    throw std::invalid_argument("config: unknown problem '" + problem + "'");
  }
  if (scenario.empty() || scenario.find(',') != std::string::npos ||
      scenario.find('\n') != std::string::npos) {
    throw std::invalid_argument("config: bad scenario label");
  }
  if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (replications < 1) {
    throw std::invalid_argument("config: replications must be >= 1");
  }
  if (algorithms.empty()) throw std::invalid_argument("config: no algorithms");
  for (const auto& a : algorithms) {
    if (!kKnownAlgorithms.count(a)) {
      throw std::invalid_argument("config: unknown algorithm '" + a + "'");
    }
  }
  if (budgets.empty()) throw std::invalid_argument("config: no budgets");
  for (auto b : budgets) {
    if (b < 1) throw std::invalid_argument("config: budgets must be >= 1");
  }
  if (s_runs < 1) throw std::invalid_argument("config: S must be >= 1");
  if (!(t_fraction > 0.0)) {
    throw std::invalid_argument("config: t_fraction must be > 0");
  }
  if (k_eval < 1) throw std::invalid_argument("config: K must be >= 1");
  if (n0 < 2) throw std::invalid_argument("config: N0 must be >= 2");
}

ExperimentConfig config_from_string(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section marker
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value, got '" + line +
                                  "'");
    }
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    if (key == "scenario") config.scenario = value;
    else if (key == "problem") config.problem = value;
    else if (key == "n") config.n = std::stoull(value);
    else if (key == "noise") config.noise_sigma = std::stod(value);
    else if (key == "sparsity") config.sparsity = std::stod(value);
    else if (key == "scad_a") config.scad.a = std::stod(value);
    else if (key == "scad_lambda") config.scad.lambda = std::stod(value);
    else if (key == "lambda1") config.lambda1 = std::stod(value);
    else if (key == "lambda2") config.lambda2 = std::stod(value);
    else if (key == "lambda3") config.lambda3 = std::stod(value);
    else if (key == "delta") config.delta = std::stod(value);
    else if (key == "algorithms") {
      config.algorithms.clear();
      for (auto& part : split(value, ',')) {
        const std::string name = trimmed(part);
        if (!name.empty()) config.algorithms.push_back(name);
      }
    } else if (key == "budgets") {
      config.budgets.clear();
      for (auto& part : split(value, ',')) {
        const std::string b = trimmed(part);
        if (!b.empty()) config.budgets.push_back(std::stoull(b));
      }
    } else if (key == "replications") config.replications = std::stoull(value);
    else if (key == "s_runs") config.s_runs = std::stoull(value);
    else if (key == "t_fraction") config.t_fraction = std::stod(value);
    else if (key == "k_eval") config.k_eval = std::stoull(value);
    else if (key == "n0") config.n0 = std::stoull(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

std::string config_to_string(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "[experiment]\n"
      << "scenario = " << config.scenario << "\n"
      << "problem = " << config.problem << "\n"
      << "n = " << config.n << "\n"
      << "noise = " << fmt17(config.noise_sigma) << "\n"
      << "sparsity = " << fmt17(config.sparsity) << "\n"
      << "scad_a = " << fmt17(config.scad.a) << "\n"
      << "scad_lambda = " << fmt17(config.scad.lambda) << "\n"
      << "lambda1 = " << fmt17(config.lambda1) << "\n"
      << "lambda2 = " << fmt17(config.lambda2) << "\n"
      << "lambda3 = " << fmt17(config.lambda3) << "\n"
      << "delta = " << fmt17(config.delta) << "\n"
      << "algorithms = ";
  for (std::size_t i = 0; i < config.algorithms.size(); ++i) {
    out << (i ? "," : "") << config.algorithms[i];
  }
  out << "\nbudgets = ";
  for (std::size_t i = 0; i < config.budgets.size(); ++i) {
    out << (i ? "," : "") << config.budgets[i];
  }
  out << "\nreplications = " << config.replications << "\n"
      << "s_runs = " << config.s_runs << "\n"
      << "t_fraction = " << fmt17(config.t_fraction) << "\n"
      << "k_eval = " << config.k_eval << "\n"
      << "n0 = " << config.n0 << "\n"
      << "seed = " << config.seed << "\n";
  return out.str();
}

namespace {

enum class AlgKind { kPg, kRspg, kTwoPhase, kTwoPhaseV, kRspgf };

struct CellPlan {
  std::string algorithm;
  std::uint64_t ns = 0;
  std::size_t cell_id = 0;  // stable position in the algorithm x budget grid
  AlgKind kind = AlgKind::kRspg;
  SolverConfig solver;        // per-run budget already applied for 2-RSPG
  std::uint64_t pg_iters = 0;
  std::uint64_t t_samples = 0;
  double eval_gamma = 0.0;
};

AlgKind alg_kind(const std::string& name) {
  if (name == "PG") return AlgKind::kPg;
  if (name == "RSPG") return AlgKind::kRspg;
  if (name == "2-RSPG") return AlgKind::kTwoPhase;
  if (name == "2-RSPG-V") return AlgKind::kTwoPhaseV;
  if (name == "RSPGF") return AlgKind::kRspgf;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::uint64_t t_from_iters(std::uint64_t n_iters, double fraction) {
  const double t = std::floor(static_cast<double>(n_iters) * fraction);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(t));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config,
                                unsigned threads) {
  config.validate();
  if (threads < 1) threads = 1;
  const auto t_start = std::chrono::steady_clock::now();

  CompositeProblem problem;
  Vector true_x;
  bool is_lsq = config.problem == "least_squares";
  if (is_lsq) {
    LsqInstance inst =
        gen_least_squares(config.n, config.sparsity, config.noise_sigma,
                          config.scad, config.seed);
    problem = std::move(inst.problem);
    true_x = std::move(inst.true_x);
  } else {
    S3vmInstance inst =
        gen_s3vm(config.n, config.sparsity, config.delta, config.lambda1,
                 config.lambda2, config.lambda3, config.seed);
    problem = std::move(inst.problem);
    true_x = std::move(inst.true_x);
  }
  const Geometry geometry = Geometry::euclidean();
  const double alpha = geometry.modulus_alpha();

  RngStream master = RngStream::from_seed(config.seed);
  RngStream pilot_stream = master.child(10);
  const ProblemParams params =
      estimate_parameters(problem, problem.x1, config.n0, pilot_stream);

  ExperimentReport report;
  std::vector<CellPlan> plans;
  for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
    for (std::size_t bi = 0; bi < config.budgets.size(); ++bi) {
      CellPlan plan;
      plan.algorithm = config.algorithms[ai];
      plan.ns = config.budgets[bi];
      plan.cell_id = ai * config.budgets.size() + bi;
      plan.kind = alg_kind(plan.algorithm);
      SolverConfig& sc = plan.solver;
      sc.oracle_budget = plan.ns;
      sc.lipschitz = params.lipschitz_hat;
      sc.sigma = params.sigma_hat;
      sc.d_tilde = params.d_tilde;
      sc.grad_bound = params.grad_bound_hat;
      plan.eval_gamma = alpha / (2.0 * params.lipschitz_hat);
      try {
        switch (plan.kind) {
          case AlgKind::kPg: {
            if (!problem.sfo.true_gradient) {
              throw std::invalid_argument("no exact gradient available");
            }
            plan.pg_iters = plan.ns;
            plan.eval_gamma = alpha / params.lipschitz_hat;
            break;
          }
          case AlgKind::kRspg: {
            const std::uint64_t m = rspg_batch_size(
                plan.ns, sc.sigma, sc.lipschitz, sc.d_tilde);
            if (plan.ns / m == 0) {
              throw std::invalid_argument("budget below one batch");
            }
            break;
          }
          case AlgKind::kTwoPhase: {
            const std::uint64_t per_run = plan.ns / config.s_runs;
            if (per_run == 0) {
              throw std::invalid_argument("budget below S runs");
            }
            sc.oracle_budget = per_run;
            const std::uint64_t m = rspg_batch_size(
                per_run, sc.sigma, sc.lipschitz, sc.d_tilde);
            const std::uint64_t n_iters = per_run / m;
            if (n_iters == 0) {
              throw std::invalid_argument("per-run budget below one batch");
            }
            plan.t_samples = t_from_iters(n_iters, config.t_fraction);
            break;
          }
          case AlgKind::kTwoPhaseV: {
            const std::uint64_t m = rspg_batch_size(
                plan.ns, sc.sigma, sc.lipschitz, sc.d_tilde);
            const std::uint64_t n_iters = plan.ns / m;
            if (n_iters == 0) {
              throw std::invalid_argument("budget below one batch");
            }
            plan.t_samples = t_from_iters(n_iters, config.t_fraction);
            break;
          }
          case AlgKind::kRspgf: {
            if (!problem.szo.shared_query) {
              throw std::invalid_argument("no zeroth-order oracle available");
            }
            const std::uint64_t m = rspgf_batch_size(
                plan.ns, problem.x1.size(), sc.grad_bound, sc.sigma,
                sc.lipschitz, sc.d_tilde);
            if (plan.ns / m == 0) {
              throw std::invalid_argument("budget below one batch");
            }
            break;
          }
        }
      } catch (const std::exception& e) {
        report.skipped.push_back({plan.algorithm, plan.ns, e.what()});
        continue;
      }
      plans.push_back(std::move(plan));
    }
  }

  struct Task {
    std::size_t plan_index;
    std::uint64_t replication;  // 1-based
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    for (std::uint64_t r = 1; r <= config.replications; ++r) {
      tasks.push_back({p, r});
    }
  }

  std::vector<std::optional<ReportRow>> slots(tasks.size());
  std::mutex skip_mutex;
  std::vector<SkippedCell> run_failures;
  std::atomic<std::size_t> next{0};

  const Vector* truth = is_lsq ? &true_x : nullptr;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const CellPlan& plan = plans[task.plan_index];
      RngStream cell_stream =
          master.child(100 + plan.cell_id).child(task.replication);
      SolverConfig sc = plan.solver;
      {
        RngStream seed_stream = cell_stream.child(0);
        sc.master_seed = seed_stream.next_u64();
      }
      try {
        SolverRun run;
        switch (plan.kind) {
          case AlgKind::kPg:
            run = pg_solve(problem, geometry, sc, plan.pg_iters);
            run.counters.sfo_calls = plan.pg_iters;
            break;
          case AlgKind::kRspg:
            run = rspg_solve(problem, geometry, sc);
            break;
          case AlgKind::kTwoPhase:
            run = two_phase_rspg(problem, geometry, sc, config.s_runs,
                                 plan.t_samples);
            break;
          case AlgKind::kTwoPhaseV:
            run = two_phase_rspg_v(problem, geometry, sc, config.s_runs,
                                   plan.t_samples);
            break;
          case AlgKind::kRspgf:
            run = rspgf_solve(problem, geometry, sc);
            break;
        }
        RngStream eval_stream = cell_stream.child(1);
        const SolutionMetrics metrics =
            evaluate_solution(problem, geometry, run.output_x, plan.eval_gamma,
                              config.k_eval, eval_stream, truth);
        ReportRow row;
        row.scenario = config.scenario;
        row.n = config.n;
        row.noise = config.noise_sigma;
        row.algorithm = plan.algorithm;
        row.ns = plan.ns;
        row.replication = task.replication;
        row.mapping_norm_sq = metrics.mapping_norm_sq;
        row.objective = metrics.objective;
        row.zero_ratio = metrics.zero_ratio;
        row.sfo_calls = run.counters.sfo_calls + run.counters.szo_calls;
        row.post_calls =
            run.post_counters.sfo_calls + run.post_counters.szo_calls;
        row.wall_ms = 0.0;
        slots[i] = std::move(row);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(skip_mutex);
        run_failures.push_back({plan.algorithm, plan.ns, e.what()});
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& slot : slots) {
    if (slot) report.rows.push_back(std::move(*slot));
  }
  std::sort(report.rows.begin(), report.rows.end(), row_key_less);
  for (auto& f : run_failures) report.skipped.push_back(std::move(f));
  std::sort(report.skipped.begin(), report.skipped.end(),
            [](const SkippedCell& a, const SkippedCell& b) {
              return std::tie(a.algorithm, a.ns, a.reason) <
                     std::tie(b.algorithm, b.ns, b.reason);
            });
  report.skipped.erase(
      std::unique(report.skipped.begin(), report.skipped.end(),
                  [](const SkippedCell& a, const SkippedCell& b) {
                    return a.algorithm == b.algorithm && a.ns == b.ns &&
                           a.reason == b.reason;
                  }),
      report.skipped.end());

  report.wall_ms_total =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();
  return report;
}

std::vector<SummaryRow> summarize(const ExperimentReport& report) {
  if (report.rows.empty()) {
    throw std::invalid_argument("summarize: empty report");
  }
  std::vector<ReportRow> rows = report.rows;
  std::sort(rows.begin(), rows.end(), row_key_less);

  std::vector<SummaryRow> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].scenario == rows[i].scenario &&
           rows[j].algorithm == rows[i].algorithm && rows[j].ns == rows[i].ns) {
      ++j;
    }
    const std::size_t count = j - i;
    SummaryRow s;
    s.scenario = rows[i].scenario;
    s.n = rows[i].n;
    s.noise = rows[i].noise;
    s.ns = rows[i].ns;
    s.algorithm = rows[i].algorithm;
    s.replications = count;

    auto mean_of = [&](auto getter) {
      double total = 0.0;
      for (std::size_t k = i; k < j; ++k) total += getter(rows[k]);
      return total / static_cast<double>(count);
    };
    auto var_of = [&](auto getter, double mean) -> std::optional<double> {
      if (count < 2) return std::nullopt;
      double total = 0.0;
      for (std::size_t k = i; k < j; ++k) {
        const double d = getter(rows[k]) - mean;
        total += d * d;
      }
      return total / static_cast<double>(count - 1);
    };
    auto map_get = [](const ReportRow& r) { return r.mapping_norm_sq; };
    auto obj_get = [](const ReportRow& r) { return r.objective; };
    s.mean_mapping = mean_of(map_get);
    s.var_mapping = var_of(map_get, s.mean_mapping);
    s.mean_objective = mean_of(obj_get);
    s.var_objective = var_of(obj_get, s.mean_objective);
    bool all_zero = true;
    for (std::size_t k = i; k < j; ++k) {
      if (!rows[k].zero_ratio) all_zero = false;
    }
    if (all_zero) {
      auto zero_get = [](const ReportRow& r) { return *r.zero_ratio; };
      s.mean_zero = mean_of(zero_get);
      s.var_zero = var_of(zero_get, *s.mean_zero);
    }
    out.push_back(std::move(s));
    i = j;
  }
  return out;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& r : report.rows) {
    out << r.scenario << ',' << r.n << ',' << fmt17(r.noise) << ','
        << r.algorithm << ',' << r.ns << ',' << r.replication << ','
        << fmt17(r.mapping_norm_sq) << ',' << fmt17(r.objective) << ','
        << (r.zero_ratio ? fmt17(*r.zero_ratio) : std::string()) << ','
        << r.sfo_calls << ',' << r.post_calls << ',' << fmt17(r.wall_ms)
        << "\n";
  }
  return out.str();
}

ExperimentReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trimmed(line) != kCsvHeader) {
    throw std::invalid_argument("report csv: bad header");
  }
  ExperimentReport report;
  while (std::getline(in, line)) {
    line = trimmed(line);
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 12) {
      throw std::invalid_argument("report csv: bad row '" + line + "'");
    }
    ReportRow r;
    r.scenario = parts[0];
    r.n = std::stoull(parts[1]);
    r.noise = std::stod(parts[2]);
    r.algorithm = parts[3];
    r.ns = std::stoull(parts[4]);
    r.replication = std::stoull(parts[5]);
    r.mapping_norm_sq = std::stod(parts[6]);
    r.objective = std::stod(parts[7]);
    if (!parts[8].empty()) r.zero_ratio = std::stod(parts[8]);
    r.sfo_calls = std::stoull(parts[9]);
    r.post_calls = std::stoull(parts[10]);
    r.wall_ms = std::stod(parts[11]);
    report.rows.push_back(std::move(r));
  }
  return report;
}

namespace {

json summary_row_json(const SummaryRow& s) {
  json j;
  j["scenario"] = s.scenario;
  j["n"] = s.n;
  j["noise"] = s.noise;
  j["NS"] = s.ns;
  j["algorithm"] = s.algorithm;
  j["replications"] = s.replications;
  j["mean_mapping_norm_sq"] = s.mean_mapping;
  if (s.var_mapping) j["var_mapping_norm_sq"] = *s.var_mapping;
  j["mean_objective"] = s.mean_objective;
  if (s.var_objective) j["var_objective"] = *s.var_objective;
  if (s.mean_zero) j["mean_zero_ratio"] = *s.mean_zero;
  if (s.var_zero) j["var_zero_ratio"] = *s.var_zero;
  return j;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["scenario"] = r.scenario;
    row["n"] = r.n;
    row["noise"] = r.noise;
    row["algorithm"] = r.algorithm;
    row["NS"] = r.ns;
    row["replication"] = r.replication;
    row["mapping_norm_sq"] = r.mapping_norm_sq;
    row["objective"] = r.objective;
    if (r.zero_ratio) row["zero_ratio"] = *r.zero_ratio;
    row["sfo_calls"] = r.sfo_calls;
    row["post_calls"] = r.post_calls;
    row["wall_ms"] = r.wall_ms;
    j["rows"].push_back(std::move(row));
  }
  j["skipped"] = json::array();
  for (const auto& s : report.skipped) {
    j["skipped"].push_back(
        {{"algorithm", s.algorithm}, {"NS", s.ns}, {"reason", s.reason}});
  }
  j["aggregates"] = json::array();
  if (!report.rows.empty()) {
    for (const auto& s : summarize(report)) {
      j["aggregates"].push_back(summary_row_json(s));
    }
  }
  return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentReport report;
  for (const auto& row : j.at("rows")) {
    ReportRow r;
    r.scenario = row.at("scenario").get<std::string>();
    r.n = row.at("n").get<std::size_t>();
    r.noise = row.at("noise").get<double>();
    r.algorithm = row.at("algorithm").get<std::string>();
    r.ns = row.at("NS").get<std::uint64_t>();
    r.replication = row.at("replication").get<std::uint64_t>();
    r.mapping_norm_sq = row.at("mapping_norm_sq").get<double>();
    r.objective = row.at("objective").get<double>();
    if (row.contains("zero_ratio")) r.zero_ratio = row["zero_ratio"].get<double>();
    r.sfo_calls = row.at("sfo_calls").get<std::uint64_t>();
    r.post_calls = row.at("post_calls").get<std::uint64_t>();
    r.wall_ms = row.at("wall_ms").get<double>();
    report.rows.push_back(std::move(r));
  }
  if (j.contains("skipped")) {
    for (const auto& s : j["skipped"]) {
      report.skipped.push_back({s.at("algorithm").get<std::string>(),
                                s.at("NS").get<std::uint64_t>(),
                                s.at("reason").get<std::string>()});
    }
  }
  if (j.contains("aggregates") && !report.rows.empty()) {
    json expected = json::array();
    for (const auto& s : summarize(report)) {
      expected.push_back(summary_row_json(s));
    }
    if (expected != j["aggregates"]) {
      throw std::runtime_error(
          "report json: stored aggregates disagree with the rows");
    }
  }
  return report;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "scenario,n,noise,NS,algorithm,replications,mean_mapping_norm_sq,"
         "var_mapping_norm_sq,mean_objective,var_objective,mean_zero_ratio,"
         "var_zero_ratio\n";
  for (const auto& s : rows) {
    out << s.scenario << ',' << s.n << ',' << fmt17(s.noise) << ',' << s.ns
        << ',' << s.algorithm << ',' << s.replications << ','
        << fmt17(s.mean_mapping) << ','
        << (s.var_mapping ? fmt17(*s.var_mapping) : std::string()) << ','
        << fmt17(s.mean_objective) << ','
        << (s.var_objective ? fmt17(*s.var_objective) : std::string()) << ','
        << (s.mean_zero ? fmt17(*s.mean_zero) : std::string()) << ','
        << (s.var_zero ? fmt17(*s.var_zero) : std::string()) << "\n";
  }
  return out.str();
}

std::string summary_to_json(const std::vector<SummaryRow>& rows) {
  json j = json::array();
  for (const auto& s : rows) j.push_back(summary_row_json(s));
  return j.dump(2) + "\n";
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  // Collect the column (algorithm) and row (NS) keys in first-seen order.
  std::vector<std::string> algs;
  std::vector<std::uint64_t> budgets;
  for (const auto& s : rows) {
    if (std::find(algs.begin(), algs.end(), s.algorithm) == algs.end()) {
      algs.push_back(s.algorithm);
    }
    if (std::find(budgets.begin(), budgets.end(), s.ns) == budgets.end()) {
      budgets.push_back(s.ns);
    }
  }
  std::sort(budgets.begin(), budgets.end());

  auto find_cell = [&](std::uint64_t ns,
                       const std::string& alg) -> const SummaryRow* {
    for (const auto& s : rows) {
      if (s.ns == ns && s.algorithm == alg) return &s;
    }
    return nullptr;
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%-14.4e", v);
    return std::string(buf);
  };

  std::ostringstream out;
  if (!rows.empty()) {
    out << "scenario " << rows.front().scenario << " (n=" << rows.front().n
        << ", noise=" << rows.front().noise << ")\n";
  }
  out << "mean and sample variance of the estimated squared gradient-mapping "
         "norm\n\n";
  char head[64];
  std::snprintf(head, sizeof(head), "%-10s %-6s", "NS", "stat");
  out << head;
  for (const auto& a : algs) {
    char col[32];
    std::snprintf(col, sizeof(col), " %-14s", a.c_str());
    out << col;
  }
  out << "\n";
  for (auto ns : budgets) {
    for (int stat = 0; stat < 2; ++stat) {
      char lead[64];
      if (stat == 0) {
        std::snprintf(lead, sizeof(lead), "%-10llu %-6s",
                      static_cast<unsigned long long>(ns), "mean");
      } else {
        std::snprintf(lead, sizeof(lead), "%-10s %-6s", "", "var.");
      }
      out << lead;
      for (const auto& a : algs) {
        const SummaryRow* cell = find_cell(ns, a);
        if (cell == nullptr) {
          out << " " << "--            ";
        } else if (stat == 0) {
          out << " " << num(cell->mean_mapping);
        } else if (cell->var_mapping) {
          out << " " << num(*cell->var_mapping);
        } else {
          out << " " << "--            ";
        }
      }
      out << "\n";
    }
  }
  // Zero-recovery block for scenarios that report it.
  bool any_zero = false;
  for (const auto& s : rows) any_zero = any_zero || s.mean_zero.has_value();
  if (any_zero) {
    out << "\nmean ratio of recovered zero coefficients\n";
    for (auto ns : budgets) {
      char lead[64];
      std::snprintf(lead, sizeof(lead), "%-10llu %-6s",
                    static_cast<unsigned long long>(ns), "mean");
      out << lead;
      for (const auto& a : algs) {
        const SummaryRow* cell = find_cell(ns, a);
        if (cell != nullptr && cell->mean_zero) {
          out << " " << num(*cell->mean_zero);
        } else {
          out << " " << "--            ";
        }
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace rspg
