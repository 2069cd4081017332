#include <algorithm>
#include <cstdio>
#include <thread>

#include "rspg/conformance.hpp"

int main() {
  const unsigned threads =
      std::max(1u, std::thread::hardware_concurrency());
  const auto results = rspg::run_all_checks(threads);
  bool all_passed = true;
  int index = 1;
  for (const auto& result : results) {
    std::printf("%s %2d %s: %s\n", result.passed ? "PASS" : "FAIL", index++,
                result.name.c_str(), result.detail.c_str());
    all_passed = all_passed && result.passed;
  }
  return all_passed ? 0 : 1;
}
