#pragma once

// Experiment configuration: flat "key = value" text, one key per line, '#'
// starts a comment. Lists are comma separated. Every file must declare
// schema_version = 1; unknown keys and unknown enum tokens are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "proxfi/chain.hpp"

namespace proxfi {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentMode {
  verify_ideal,
  verify_perturbed,
  mc_exact,
  mc_smoothed,
  ula_baseline,
  restart,
  sweep_epsilon,
  check_lemmas
};

std::string to_string(ExperimentMode m);
ExperimentMode parse_experiment_mode(const std::string& s);

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string target = "gaussian(0,1)";
  ExperimentMode mode = ExperimentMode::verify_ideal;

  // Sampler. h = 0 selects the mode default; h_over_L > 0 sets h = h_over_L / L.
  double h = 0.0;
  double h_over_L = 0.0;
  int steps = 20;
  RgoMode rgo_mode = RgoMode::exact_rejection;
  OutputMode output = OutputMode::random_iterate;
  InnerMethod inner_method = InnerMethod::mala;
  double inner_step = 0.1;
  int inner_steps = 100;
  int inner_burn_in = 0;
  double delta = 1e-4;
  double smoothing_variance = -1.0;  // negative: (delta^2 + d sqrt(delta))^{1/4} / L

  // Initial law: "gaussian" N(init_mean 1, init_variance I) or "tilted"
  // pi(x) (1 + init_tilt tanh(2 x_1)). init_variance < 0 means 1/L.
  std::string init = "gaussian";
  double init_mean = 0.0;
  double init_variance = -1.0;
  double init_tilt = 0.9;

  // Grid: nodes per axis (0: 4096 in 1D, 96 in 2D); grid_min < grid_max fixes
  // the range on every axis, otherwise it is chosen from the target.
  int grid_nodes = 0;
  double grid_min = 0.0;
  double grid_max = 0.0;

  std::vector<double> eps_mix{0.0, 0.01, 0.05};
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};
  long max_steps = 200000;
  int chains = 10000;
  std::vector<std::uint64_t> seeds{1};
  int lemma_triples = 200;
  std::vector<int> heat_orders{2, 3, 4};
  std::vector<double> heat_times{0.05, 0.1, 0.25};
  std::vector<double> heat_scaled_times{0.25};  // t = s / q
  int restart_rounds = 5;                       // 0: derive from epsilon_final
  double epsilon_final = 0.25;
  std::vector<double> ula_step{0.05, 0.1};
  long ula_length = 1000000;
  double ula_compare_step = 0.01;
  long ula_budget = 0;  // 0 skips the matched-budget comparison
  double smoothness = 0.0;  // > 0 replaces the certified L
  std::string output_dir = "proxfi_out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Every key, doubles printed with 17 significant digits.
std::string serialize_config(const ExperimentConfig& config);

// PROXFI_SEED, when set, replaces the seed list with that single seed.
void apply_environment(ExperimentConfig& config);

}  // namespace proxfi
