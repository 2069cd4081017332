#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rspg {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Upper-tail p-value of the chi-square distribution with dof degrees of
// freedom, via the regularized incomplete gamma function.
double chi_square_p_value(double stat, std::uint64_t dof);

CheckResult check_prox_properties();
CheckResult check_pg_bound();
CheckResult check_rspg_expectation();
CheckResult check_smoothing_identities();
CheckResult check_zeroth_first_agreement();
CheckResult check_termination_law();
CheckResult check_parameter_formulas();
CheckResult check_trend_reproduction(unsigned threads);
CheckResult check_constraint_maintenance();
CheckResult check_reproducibility();

// All ten checks in order; threads only affects the experiment-driven ones.
std::vector<CheckResult> run_all_checks(unsigned threads);

}  // namespace rspg
