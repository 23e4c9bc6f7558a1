#pragma once

// Monte Carlo proximal sampler, the restart wrapper for strongly log-concave
// targets, and the ULA baseline.

#include <optional>
#include <string>
#include <vector>

#include "proxfi/grid.hpp"
#include "proxfi/grid_oracle.hpp"
#include "proxfi/inner_samplers.hpp"
#include "proxfi/ledger.hpp"
#include "proxfi/random.hpp"
#include "proxfi/rgo.hpp"

namespace proxfi {

enum class RgoMode { exact_rejection, smoothed, grid_reference };
enum class OutputMode { random_iterate, averaged_density, final_iterate };

std::string to_string(RgoMode m);
std::string to_string(OutputMode m);
RgoMode parse_rgo_mode(const std::string& s);
OutputMode parse_output_mode(const std::string& s);

struct SamplerConfig {
  double h = 0.0;  // 0 selects the default for the mode
  int steps = 20;  // K
  RgoMode rgo_mode = RgoMode::exact_rejection;
  OutputMode output = OutputMode::random_iterate;
  SmoothedRgoConfig smoothed;
  RejectionConfig rejection;
  int reference_nodes = 2048;  // grid_reference mode

  // exact_rejection and grid_reference: h defaults to 1/(L(d+1)); smoothed
  // fixes h = 1/(2L) and rejects any other explicit value.
  double resolved_h(const Potential& potential) const;
  void validate(const Potential& potential) const;
};

struct ChainState {
  Vector x;
  int k = 0;
  QueryLedger counters;
};

struct LedgerRow {
  int chain_id = 0;
  int k = 0;
  QueryLedger counters;  // cumulative after iteration k
  Vector x;
};

struct ChainRun {
  Vector output;
  int selected = 0;            // J for random_iterate, K for final_iterate
  std::vector<Vector> path;    // x_0 .. x_K when recorded
  std::vector<LedgerRow> rows;  // when recorded
  QueryLedger ledger;
};

// Forward step Y ~ N(X, hI), then the configured oracle. A random_iterate
// output draws J ~ Unif{1..K} before the run; averaged_density is grid-only.
ChainRun run_proximal_chain(const Potential& potential, const SamplerConfig& config, const InitSampler& init,
                            Rng& rng, bool record = false, int chain_id = 0);

// Independent chains on streams make_stream(seed, i). Results are ordered by
// chain id and do not depend on the worker count.
std::vector<ChainRun> run_chains(const Potential& potential, const SamplerConfig& config, const InitSampler& init,
                                 std::uint64_t seed, int chains, bool record = false, int workers = 0);

std::string ledger_csv(const std::vector<ChainRun>& runs);

struct RestartConfig {
  double alpha = 0.0;
  double kl0 = 0.0;
  double epsilon_final = 0.1;
  std::optional<int> rounds_override;

  // eps_k^2 = alpha kl0 / 2^k
  double accuracy(int round) const;
  // Rounds k = 0 .. k* with k* the first round where eps_k^2 <= 2 alpha eps_final^2.
  int rounds() const;
  std::vector<double> schedule() const;
};

// Steps per round so that the averaged-iterate bound reaches eps_k^2 from
// KL <= kl0 / 2^k: ceil(1 / (alpha h (1 - L h / 2))).
long restart_round_steps(double alpha, double h, double smoothness);

struct RestartRound {
  int round = 0;
  double accuracy = 0.0;  // eps_k^2
  long steps = 0;
  double kl_start = 0.0;
  double kl_end = 0.0;
  double fi_averaged = 0.0;
  double renyi2_end = 0.0;
};

struct RestartTrace {
  double kl0 = 0.0;
  double h = 0.0;
  std::vector<RestartRound> rounds;
  GridDensity final_density;
};

// Grid-reference restart: each round runs the ideal chain and restarts from
// its averaged iterate. kl0 in the config is ignored in favour of KL(rho0 | pi).
RestartTrace run_restart_grid(const Potential& potential, RestartConfig restart, double h, const GridDensity& rho0);

struct RestartRun {
  Vector x;
  QueryLedger ledger;
  std::vector<long> round_steps;
};

// Monte Carlo restart: each round samples a random iterate of a proximal chain
// started from the previous round's output. Default init N(0, I/L).
RestartRun run_restart(const Potential& potential, const RestartConfig& restart, SamplerConfig sampler,
                       const InitSampler& init, Rng& rng);

// N(0, I/L) for targets with mode at the origin.
InitSampler restart_initialisation(const Potential& potential);
void require_restart_target(const Potential& potential);

struct UlaBaselineRun {
  Vector sample;  // x_J with J ~ Unif{1..K}
  int selected = 0;
  QueryLedger ledger;
};
UlaBaselineRun run_ula_baseline(const Potential& potential, double step, int steps, const InitSampler& init,
                                Rng& rng);

// Draw from a 1D grid density by inverting its trapezoidal CDF.
double sample_grid_density(const GridDensity& density, std::span<const double> cdf, Rng& rng);

}  // namespace proxfi
