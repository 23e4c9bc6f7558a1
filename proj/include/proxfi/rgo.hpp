#pragma once

// Restricted Gaussian oracle R_y(x) ∝ exp(-f(x) - |x - y|^2 / (2h)): exact draws
// by rejection from a Gaussian envelope, and the smoothed approximation that
// samples a rescaled strongly log-concave target and adds Gaussian noise.

#include <vector>

#include "proxfi/inner_samplers.hpp"
#include "proxfi/ledger.hpp"
#include "proxfi/prox.hpp"
#include "proxfi/random.hpp"
#include "proxfi/targets.hpp"

namespace proxfi {

inline constexpr double kAcceptanceSlack = 1e-12;

struct RejectionConfig {
  int max_trials = 10000;
  bool record_acceptance = false;
  ProxConfig prox;
};

struct RejectionStats {
  int trials = 0;
  std::vector<double> acceptance_probability_trace;
  QueryLedger queries;  // prox is one oracle call; its internal iterations are not booked
};

struct RgoDraw {
  Vector x;
  RejectionStats stats;
};

// Envelope from f(x) >= f(a) + <grad f(a), x - a> - (L/2)|x - a|^2 around the
// prox point a: N(m, (1/h - L)^{-1} I), m = (y/h - L a - grad f(a)) / (1/h - L).
struct RejectionEnvelope {
  Vector anchor;
  double f_anchor = 0.0;
  Vector grad_anchor;
  Vector mean;
  double variance = 0.0;
};
RejectionEnvelope rejection_envelope(const Potential& potential, double h, const Vector& y, const Vector& anchor);
// exp(f(a) + <grad f(a), x - a> - (L/2)|x - a|^2 - f(x)); throws
// SmoothnessViolation above 1 + kAcceptanceSlack, clamps to 1 below it.
double acceptance_probability(const Potential& potential, const RejectionEnvelope& env, const Vector& x);

// Requires 0 < h < 1/L. Throws RunawayRejection after config.max_trials.
RgoDraw rgo_exact(const Potential& potential, double h, const Vector& y, Rng& rng, const RejectionConfig& config = {});

// Expected trials of the envelope when f is quadratic with curvature L: ((1 + hL)/(1 - hL))^{d/2}.
double gaussian_expected_trials(double h, double smoothness, int dim);

// nu(u) ∝ exp(-f(m + u/sqrt(L)) - L |m + u/sqrt(L) - y|^2), certified
// 1-strongly convex and 3-smooth with mode 0. Throws StaleMode unless
// |grad f(m) + 2L(m - y)| <= tolerance (default: the prox tolerance at h = 1/(2L)).
Potential build_rescaled_target(const Potential& potential, double smoothness, const Vector& y, const Vector& m,
                                double tolerance = -1.0);

struct SmoothedRgoConfig {
  double delta = 1e-4;
  double smoothing_variance = -1.0;  // negative selects the default
  InnerSamplerConfig inner;
  ProxConfig prox;

  double smoothing_variance_for(int dim, double smoothness) const;
};

// (delta^2 + d sqrt(delta))^{1/4} / L
double default_smoothing_variance(double delta, int dim, double smoothness);
// min(eps^2 / L, 1 / d^2) * 1e-2; a heuristic instantiation.
double default_inner_accuracy(double epsilon, double smoothness, int dim);

struct SmoothedDraw {
  Vector x;
  QueryLedger queries;
};

// m = prox_{f/(2L)}(y), U from the inner sampler on nu, returns m + U/sqrt(L) + sqrt(t) Z.
SmoothedDraw rgo_smoothed(const Potential& potential, double smoothness, const Vector& y,
                          const SmoothedRgoConfig& config, Rng& rng);

}  // namespace proxfi
