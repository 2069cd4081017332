#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rspg/bench.hpp"
#include "rspg/conformance.hpp"
#include "rspg/solvers.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir, unsigned threads,
            const std::string& format) {
  rspg::ExperimentConfig config = rspg::config_from_string(read_file(config_path));
  if (seed) config.seed = *seed;
  const rspg::ExperimentReport report = rspg::run_experiment(config, threads);
  const auto summary = rspg::summarize(report);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (format == "json") {
    write_file(dir / "report.json", rspg::report_to_json(report));
    write_file(dir / "summary.json", rspg::summary_to_json(summary));
  } else {
    write_file(dir / "report.csv", rspg::report_to_csv(report));
    write_file(dir / "summary.csv", rspg::summary_to_csv(summary));
    if (!report.skipped.empty()) {
      std::ostringstream skipped;
      skipped << "algorithm,NS,reason\n";
      for (const auto& s : report.skipped) {
        skipped << s.algorithm << ',' << s.ns << ',' << s.reason << "\n";
      }
      write_file(dir / "skipped.csv", skipped.str());
    }
  }
  std::cout << rspg::summary_table(summary);
  for (const auto& s : report.skipped) {
    std::cerr << "skipped " << s.algorithm << " at NS=" << s.ns << ": "
              << s.reason << "\n";
  }
  std::cerr << "wall time: " << report.wall_ms_total << " ms (" << threads
            << " threads)\n";
  return 0;
}

int cmd_summarize(const std::string& report_path, const std::string& out_dir,
                  const std::string& format) {
  const std::string text = read_file(report_path);
  const rspg::ExperimentReport report =
      report_path.size() > 5 &&
              report_path.substr(report_path.size() - 5) == ".json"
          ? rspg::report_from_json(text)
          : rspg::report_from_csv(text);
  const auto summary = rspg::summarize(report);
  std::cout << rspg::summary_table(summary);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    if (format == "json") {
      write_file(dir / "summary.json", rspg::summary_to_json(summary));
    } else {
      write_file(dir / "summary.csv", rspg::summary_to_csv(summary));
    }
  }
  return 0;
}

int cmd_verify(unsigned threads) {
  bool all_passed = true;
  for (const auto& result : rspg::run_all_checks(threads)) {
    std::cout << (result.passed ? "PASS" : "FAIL") << "  " << result.name
              << ": " << result.detail << "\n";
    all_passed = all_passed && result.passed;
  }
  return all_passed ? 0 : 2;
}

int cmd_bounds(const std::string& config_path,
               std::optional<std::uint64_t> seed, const std::string& format) {
  rspg::ExperimentConfig config = rspg::config_from_string(read_file(config_path));
  if (seed) config.seed = *seed;

  rspg::CompositeProblem problem;
  std::size_t dim = config.n;
  if (config.problem == "least_squares") {
    auto inst = rspg::gen_least_squares(config.n, config.sparsity,
                                        config.noise_sigma, config.scad,
                                        config.seed);
    problem = std::move(inst.problem);
  } else {
    auto inst = rspg::gen_s3vm(config.n, config.sparsity, config.delta,
                               config.lambda1, config.lambda2, config.lambda3,
                               config.seed);
    problem = std::move(inst.problem);
    dim = config.n + 1;
  }
  rspg::RngStream master = rspg::RngStream::from_seed(config.seed);
  rspg::RngStream pilot = master.child(10);
  const rspg::ProblemParams params =
      rspg::estimate_parameters(problem, problem.x1, config.n0, pilot);

  nlohmann::json out = nlohmann::json::array();
  std::ostringstream csv;
  csv << "NS,name,value\n";
  for (auto budget : config.budgets) {
    rspg::ProblemConstants constants;
    constants.lipschitz = params.lipschitz_hat;
    constants.sigma = params.sigma_hat;
    constants.alpha = 1.0;
    constants.d_tilde = params.d_tilde;
    constants.dim = dim;
    constants.d_psi = params.d_tilde / std::sqrt(2.0);
    constants.grad_bound = params.grad_bound_hat;
    constants.mu = rspg::rspgf_smoothing_mu(params.d_tilde, dim, budget, false);
    rspg::SolverConfig solver;
    solver.oracle_budget = budget;
    solver.lipschitz = params.lipschitz_hat;
    solver.sigma = params.sigma_hat;
    solver.d_tilde = params.d_tilde;
    solver.grad_bound = params.grad_bound_hat;
    const rspg::TheoryBounds bounds =
        rspg::compute_theory_bounds(constants, solver);

    nlohmann::json entry;
    entry["NS"] = budget;
    auto put = [&](const char* name, const std::optional<double>& value) {
      if (!value) return;
      entry[name] = *value;
      csv << budget << ',' << name << ',' << *value << "\n";
    };
    put("pg_bound", bounds.pg_bound);
    put("rspg_generic", bounds.rspg_generic);
    put("rspg_nonconvex_b", bounds.rspg_nonconvex_b);
    put("rspg_convex_c", bounds.rspg_convex_c);
    put("convex_nondecreasing_gap", bounds.convex_nondecreasing_gap);
    put("convex_nonincreasing_gap", bounds.convex_nonincreasing_gap);
    put("sigma_tilde_sq", bounds.sigma_tilde_sq);
    put("theta1", bounds.theta1);
    put("theta2", bounds.theta2);
    put("rspgf_nonconvex_b", bounds.rspgf_nonconvex_b);
    put("rspgf_convex_c", bounds.rspgf_convex_c);
    put("nonconvex_simplified", bounds.nonconvex_simplified);
    put("convex_simplified", bounds.convex_simplified);
    put("rspgf_nonconvex_simplified", bounds.rspgf_nonconvex_simplified);
    put("rspgf_convex_simplified", bounds.rspgf_convex_simplified);
    out.push_back(std::move(entry));
  }
  if (format == "json") {
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic composite optimization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, report_path, out_dir = ".", format = "csv";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  auto add_common = [&](CLI::App* cmd, bool with_config) {
    if (with_config) {
      cmd->add_option("--config", config_path, "experiment config file")
          ->required();
    }
    cmd->add_option("--seed", seed, "master seed override");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "worker thread count");
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* run = app.add_subcommand("run", "run an experiment grid");
  add_common(run, true);
  CLI::App* summ = app.add_subcommand("summarize", "summarize a report file");
  summ->add_option("report", report_path, "report csv/json file")->required();
  add_common(summ, false);
  CLI::App* verify =
      app.add_subcommand("verify", "run the conformance check suite");
  add_common(verify, false);
  CLI::App* bounds =
      app.add_subcommand("bounds", "print theoretical bounds for a config");
  add_common(bounds, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      return cmd_run(config_path, seed, out_dir, threads, format);
    }
    if (summ->parsed()) {
      return cmd_summarize(
          report_path, summ->count("--out") ? out_dir : std::string(), format);
    }
    if (verify->parsed()) return cmd_verify(threads);
    if (bounds->parsed()) return cmd_bounds(config_path, seed, format);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
