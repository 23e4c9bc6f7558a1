#pragma once

// Samplers for the rescaled oracle target nu (MALA, ULA, exact Gaussian draws)
// and the ULA baseline chain.

#include <functional>
#include <string>
#include <vector>

#include "proxfi/ledger.hpp"
#include "proxfi/random.hpp"
#include "proxfi/targets.hpp"

namespace proxfi {

enum class InnerMethod { mala, ula, exact_gaussian };

struct InnerSamplerConfig {
  InnerMethod method = InnerMethod::mala;
  double step_size = 0.1;
  int n_steps = 100;
  int burn_in = 0;

  void validate() const;
  int total_steps() const { return burn_in + n_steps; }
};

std::string to_string(InnerMethod m);
InnerMethod parse_inner_method(const std::string& s);

struct InnerDraw {
  Vector x;
  QueryLedger queries;
  int accepted = 0;  // MALA only
};

// log pi(x') - log pi(x) + log q(x | x') - log q(x' | x) with
// q(b | a) = N(b; a - step grad f(a), 2 step I).
double mala_log_acceptance(const Potential& target, double step, const Vector& x, const Vector& x_prop);

// Starts at the target's mode_hint (origin when absent) and runs
// config.total_steps() Metropolis-adjusted Langevin steps.
InnerDraw mala_sample(const Potential& target, const InnerSamplerConfig& config, Rng& rng);

// Requires a Gaussian target.
Vector exact_gaussian_inner(const Potential& target, Rng& rng);

// Dispatches on config.method; ULA runs from the mode for total_steps() steps.
InnerDraw sample_inner(const Potential& target, const InnerSamplerConfig& config, Rng& rng);

using InitSampler = std::function<Vector(Rng&)>;

struct UlaPath {
  std::vector<Vector> path;  // x_0 .. x_K
  QueryLedger queries;       // K gradient evaluations
};

// x_{k+1} = x_k - step grad f(x_k) + sqrt(2 step) xi_k. Requires 0 < step < 1/L.
UlaPath ula_chain(const Potential& target, double step, int steps, const InitSampler& init, Rng& rng);

// MALA accuracy on the Gaussian rescaled target N(0, 1/3) in 1D, computed
// from the exact law of the chain on a fine node set (no sampling error).
struct MalaCalibrationRow {
  std::string target_class = "gaussian_nu";
  int dim = 1;
  double step = 0.0;
  int n_steps = 0;
  double measured_ks = 0.0;
  double measured_r3_gaussian = 0.0;
};
MalaCalibrationRow calibrate_mala_gaussian(double step, int n_steps);
// Steps {0.01, 0.02, 0.05} x n_steps {4, 8, 16, 32}, then the default (0.1, 100).
std::vector<MalaCalibrationRow> mala_calibration_table();
std::string calibration_csv(const std::vector<MalaCalibrationRow>& rows);
std::vector<MalaCalibrationRow> parse_calibration_csv(const std::string& text);

}  // namespace proxfi
