#pragma once

// Experiment runner: dispatches a configuration to the grid oracle or the
// Monte Carlo driver, collects every asserted inequality in a slack table and
// writes CSV and JSON reports.

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "proxfi/config.hpp"
#include "proxfi/ledger.hpp"

namespace proxfi {

struct SlackRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool asserted = true;  // recorded-only rows never fail a run

  double slack() const { return rhs - lhs; }
  bool pass() const { return slack() >= -tolerance; }
};

struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<SlackRow> slack;
  std::map<std::string, Series> series;
  nlohmann::json summary = nlohmann::json::object();
  QueryLedger queries;
  double wall_seconds = 0.0;  // kept out of report.json

  std::size_t failures() const;
  bool passed() const { return failures() == 0; }
};

RunReport run_experiment(const ExperimentConfig& config);

// 0 when every asserted row passes, 1 otherwise.
int exit_code(const RunReport& report);

nlohmann::json to_json(const RunReport& report);
std::string slack_table_csv(const std::vector<SlackRow>& rows);
std::string series_csv(const Series& series);

// report.json, config.txt, slack_table.csv, one CSV per series, timing.json.
void write_report(const RunReport& report, const std::string& directory);

enum class PlotKind { fi_vs_k, kl_vs_k, queries_vs_epsilon, slack_table };
PlotKind parse_plot_kind(const std::string& s);
std::string to_string(PlotKind k);

// CSV with '#' header lines naming units and the statement the series tests.
// A report without any series or rows yields the header alone; a report that
// has data but lacks the requested series throws MissingSeries.
std::string emit_plot_data(const nlohmann::json& report, PlotKind kind);

// Replaces the certified smoothness constant (strong convexity is capped at
// the new value).
Potential with_smoothness(const Potential& potential, double smoothness);

}  // namespace proxfi
