#include "proxfi/rgo.hpp"

#include <cmath>

#include "proxfi/errors.hpp"

namespace proxfi {

RejectionEnvelope rejection_envelope(const Potential& potential, double h, const Vector& y, const Vector& anchor) {
  const double L = potential.smoothness();
  RejectionEnvelope env;
  env.anchor = anchor;
  env.f_anchor = potential.value(anchor);
  env.grad_anchor = potential.gradient(anchor);
  const double precision = 1.0 / h - L;
  env.variance = 1.0 / precision;
  env.mean = (y / h - L * anchor - env.grad_anchor) / precision;
  return env;
}

double acceptance_probability(const Potential& potential, const RejectionEnvelope& env, const Vector& x) {
  const Vector off = x - env.anchor;
  const double lower = env.f_anchor + env.grad_anchor.dot(off) - 0.5 * potential.smoothness() * off.squaredNorm();
  const double p = std::exp(lower - potential.value(x));
  if (!(p <= 1.0 + kAcceptanceSlack)) {
    throw SmoothnessViolation("rejection acceptance probability " + std::to_string(p) +
                              " exceeds 1: the certified smoothness constant is too small");
  }
  return std::min(p, 1.0);
}

RgoDraw rgo_exact(const Potential& potential, double h, const Vector& y, Rng& rng, const RejectionConfig& config) {
  const double L = potential.smoothness();
  if (!(h > 0.0) || !(h * L < 1.0)) throw PreconditionError("exact RGO requires 0 < h < 1/L");
  if (config.max_trials < 1) throw InvalidParameter("rejection trial cap must be positive");
  RgoDraw out;
  const Vector anchor = prox(potential, h, y, config.prox);
  const auto env = rejection_envelope(potential, h, y, anchor);
  out.stats.queries.prox_calls = 1;
  out.stats.queries.f_evals = 1;
  out.stats.queries.grad_evals = 1;
  const double sd = std::sqrt(env.variance);
  while (true) {
    if (out.stats.trials >= config.max_trials) {
      throw RunawayRejection("rejection sampler exceeded " + std::to_string(config.max_trials) + " trials");
    }
    ++out.stats.trials;
    Vector x = env.mean + sd * standard_normal(potential.dim(), rng);
    const double p = acceptance_probability(potential, env, x);
    ++out.stats.queries.f_evals;
    if (config.record_acceptance) out.stats.acceptance_probability_trace.push_back(p);
    if (uniform01(rng) < p) {
      out.x = std::move(x);
      return out;
    }
  }
}

double gaussian_expected_trials(double h, double smoothness, int dim) {
  const double hl = h * smoothness;
  if (!(hl < 1.0)) return std::numeric_limits<double>::infinity();
  return std::pow((1.0 + hl) / (1.0 - hl), 0.5 * dim);
}

Potential build_rescaled_target(const Potential& potential, double smoothness, const Vector& y, const Vector& m,
                                double tolerance) {
  const double L = smoothness;
  if (!(L > 0.0)) throw PreconditionError("rescaled target needs L > 0");
  if (y.size() != potential.dim() || m.size() != potential.dim()) {
    throw DimensionMismatch("rescaled target point dimension differs from the potential");
  }
  const double h = 0.5 / L;
  const double tol = tolerance >= 0.0 ? tolerance : ProxConfig{}.tolerance_for(h);
  const double residual = verify_prox_optimality(potential, h, y, m);
  if (!(residual <= tol)) {
    throw StaleMode("supplied mode has prox residual " + std::to_string(residual) + " above " + std::to_string(tol));
  }
  const double root = std::sqrt(L);
  const double offset = potential.value(m) + L * (m - y).squaredNorm();
  Potential::Spec spec;
  spec.dim = potential.dim();
  spec.value = [potential, L, root, y, m, offset](const Vector& u) {
    const Vector x = m + u / root;
    return potential.value(x) + L * (x - y).squaredNorm() - offset;
  };
  spec.gradient = [potential, L, root, y, m](const Vector& u) -> Vector {
    const Vector x = m + u / root;
    return (potential.gradient(x) + 2.0 * L * (x - y)) / root;
  };
  if (potential.has_hessian()) {
    spec.hessian = [potential, L, root, m](const Vector& u) -> Matrix {
      const Vector x = m + u / root;
      return (potential.hessian(x) + 2.0 * L * Matrix::Identity(x.size(), x.size())) / L;
    };
  }
  spec.smoothness = 3.0;
  spec.strong_convexity = 1.0;
  spec.mode_hint = Vector::Zero(potential.dim());
  if (const auto& g = potential.gaussian()) {
    // f = |x - mu|^2 / (2v): in x the law has precision 1/v + 2L.
    const double precision = 1.0 / g->variance + 2.0 * L;
    const Vector x_mean = (g->mean / g->variance + 2.0 * L * y) / precision;
    spec.gaussian = GaussianForm{root * (x_mean - m), L / precision};
  }
  return Potential(std::move(spec));
}

double default_smoothing_variance(double delta, int dim, double smoothness) {
  if (!(delta > 0.0) || !(smoothness > 0.0)) throw InvalidParameter("smoothing variance needs delta > 0 and L > 0");
  return std::pow(delta * delta + dim * std::sqrt(delta), 0.25) / smoothness;
}

double default_inner_accuracy(double epsilon, double smoothness, int dim) {
  if (!(epsilon > 0.0) || !(smoothness > 0.0) || dim < 1) throw InvalidParameter("invalid accuracy inputs");
  return std::min(epsilon * epsilon / smoothness, 1.0 / (static_cast<double>(dim) * dim)) * 1e-2;
}

double SmoothedRgoConfig::smoothing_variance_for(int dim, double smoothness) const {
  return smoothing_variance >= 0.0 ? smoothing_variance : default_smoothing_variance(delta, dim, smoothness);
}

SmoothedDraw rgo_smoothed(const Potential& potential, double smoothness, const Vector& y,
                          const SmoothedRgoConfig& config, Rng& rng) {
  const double L = smoothness;
  if (!(L > 0.0)) throw PreconditionError("smoothed RGO needs L > 0");
  const double h = 0.5 / L;
  const double t = config.smoothing_variance_for(potential.dim(), L);
  SmoothedDraw out;
  const auto pr = prox_solve(potential, h, y, config.prox);
  out.queries.prox_calls = 1;
  const Potential nu = build_rescaled_target(potential, L, y, pr.x, config.prox.tolerance_for(h));
  auto inner = sample_inner(nu, config.inner, rng);
  out.queries += inner.queries;
  out.x = pr.x + inner.x / std::sqrt(L);
  if (t > 0.0) out.x += std::sqrt(t) * standard_normal(potential.dim(), rng);
  return out;
}

}  // namespace proxfi
