#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "proxfi/acceptance.hpp"
#include "proxfi/errors.hpp"
#include "proxfi/harness.hpp"
#include "proxfi/inner_samplers.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int run_command(const std::string& config_path, const std::string& out_dir) {
  auto config = proxfi::load_config(config_path);
  proxfi::apply_environment(config);
  const auto report = proxfi::run_experiment(config);
  const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
  proxfi::write_report(report, dir);
  for (const auto& row : report.slack) {
    if (row.asserted && !row.pass()) {
      std::printf("FAIL %s: lhs %.6g rhs %.6g slack %.3g\n", row.name.c_str(), row.lhs, row.rhs, row.slack());
    }
  }
  std::printf("%s: %zu rows, %zu failed; report in %s\n", report.passed() ? "PASS" : "FAIL", report.slack.size(),
              report.failures(), dir.c_str());
  return proxfi::exit_code(report) == 0 ? kExitPass : kExitAssertion;
}

int verify_all_command(const std::vector<int>& only, const std::string& work_dir, const std::string& self) {
  proxfi::AcceptanceOptions opt;
  opt.only = only;
  opt.work_dir = work_dir;
  opt.cli_path = self;
  opt.on_result = [](const proxfi::CriterionResult& r) {
    std::printf("%s\n", proxfi::format_result(r).c_str());
    std::fflush(stdout);
  };
  const auto results = proxfi::run_acceptance(opt);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
  return failed == 0 ? kExitPass : kExitAssertion;
}

int emit_command(const std::string& report_path, const std::string& kind, const std::string& out) {
  std::filesystem::path path(report_path);
  if (std::filesystem::is_directory(path)) path /= "report.json";
  std::ifstream in(path);
  if (!in) throw proxfi::ConfigError("cannot read report '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw proxfi::ConfigError("report '" + path.string() + "' is not valid JSON: " + e.what());
  }
  const std::string csv = proxfi::emit_plot_data(j, proxfi::parse_plot_kind(kind));
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(out, std::ios::binary);
    f << csv;
    if (!f) throw proxfi::Error("cannot write '" + out + "'");
  }
  return kExitPass;
}

int calibrate_command(const std::string& out) {
  const std::string csv = proxfi::calibration_csv(proxfi::mala_calibration_table());
  if (out.empty()) {
    std::cout << csv;
    return kExitPass;
  }
  std::ofstream f(out, std::ios::binary);
  f << csv;
  if (!f) throw proxfi::Error("cannot write '" + out + "'");
  return kExitPass;
}

std::string self_path(const char* argv0) {
  std::error_code ec;
  const auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::string(argv0) : p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proxfi: proximal sampler experiments and acceptance checks"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "Run one experiment and write its report");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("--out", out_dir, "Output directory (default: output_dir from the config)");

  std::vector<int> only;
  std::string work_dir = "proxfi_acceptance";
  auto* verify = app.add_subcommand("verify-all", "Run the acceptance suite, one line per criterion");
  verify->add_option("--only", only, "Criterion ids to run")->delimiter(',');
  verify->add_option("--work-dir", work_dir, "Scratch directory for subprocess runs");

  std::string report_path, kind, emit_out;
  auto* emit = app.add_subcommand("emit", "Write plot data from a report as CSV");
  emit->add_option("report", report_path, "report.json or a report directory")->required();
  emit->add_option("--kind", kind, "fi_vs_k, kl_vs_k, queries_vs_epsilon or slack_table")->required();
  emit->add_option("--out", emit_out, "Output file (default: stdout)");

  std::string calib_out;
  auto* calibrate = app.add_subcommand("calibrate", "Recompute the MALA calibration table");
  calibrate->add_option("--out", calib_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*run) return run_command(config_path, out_dir);
    if (*verify) return verify_all_command(only, work_dir, self_path(argv[0]));
    if (*emit) return emit_command(report_path, kind, emit_out);
    if (*calibrate) return calibrate_command(calib_out);
  } catch (const proxfi::ConfigError& e) {
    std::fprintf(stderr, "proxfi: %s\n", e.what());
    return kExitUsage;
  } catch (const proxfi::MissingSeries& e) {
    std::fprintf(stderr, "proxfi: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "proxfi: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
