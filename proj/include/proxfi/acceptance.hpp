#pragma once

// The acceptance suite: thirteen criteria, each reduced to a pass/fail line.
// Most criteria run through run_experiment so the CLI path is exercised; the
// sampler-level ones call the library directly.

#include <functional>
#include <string>
#include <vector>

namespace proxfi {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  // proxfi executable used to check the process exit status (criterion 13);
  // empty falls back to exit_code() on the in-process report.
  std::string cli_path;
  std::string work_dir = "proxfi_acceptance";
  std::vector<int> only;  // empty runs every criterion
  std::function<void(const CriterionResult&)> on_result;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

// "PASS  1  <title> (<seconds> s): <detail>"
std::string format_result(const CriterionResult& r);

}  // namespace proxfi
