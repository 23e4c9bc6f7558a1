// Acceptance runner: one PASS/FAIL line per criterion. Usage:
//   acceptance <proxfi-executable> [criterion ids...]
#include <cstdio>
#include <string>

#include "proxfi/acceptance.hpp"

int main(int argc, char** argv) {
  proxfi::AcceptanceOptions opt;
  if (argc > 1) opt.cli_path = argv[1];
  for (int i = 2; i < argc; ++i) opt.only.push_back(std::stoi(argv[i]));
  opt.work_dir = "acceptance_work";
  opt.on_result = [](const proxfi::CriterionResult& r) {
    std::printf("%s\n", proxfi::format_result(r).c_str());
    std::fflush(stdout);
  };
  const auto results = proxfi::run_acceptance(opt);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  return failed == 0 ? 0 : 1;
}
