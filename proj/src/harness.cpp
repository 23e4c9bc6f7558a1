#include "proxfi/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "proxfi/chain.hpp"
#include "proxfi/divergences.hpp"
#include "proxfi/errors.hpp"
#include "proxfi/grid_oracle.hpp"
#include "proxfi/stats.hpp"

namespace proxfi {

namespace {

constexpr int kGridAttempts = 4;
constexpr double kGridWidening = 1.5;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

nlohmann::json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

struct Context {
  const ExperimentConfig& cfg;
  Potential pot;
  std::optional<GaussianForm> gaussian;
  double L = 0.0;
  int d = 1;
  RunReport& report;

  void row(std::string name, double lhs, double rhs, double tol, bool asserted = true) {
    report.slack.push_back({std::move(name), lhs, rhs, tol, asserted});
  }
  void check(const std::string& name, const InequalityCheck& c, double tol) { row(name, c.lhs, c.rhs, tol); }
};

Potential resolve_target(const ExperimentConfig& cfg) {
  auto entry = parse_target(cfg.target);
  if (cfg.smoothness > 0.0) return with_smoothness(entry.potential, cfg.smoothness);
  return entry.potential;
}

double init_variance(const Context& ctx) {
  if (ctx.cfg.init_variance > 0.0) return ctx.cfg.init_variance;
  if (!(ctx.L > 0.0)) throw ConfigError("init_variance must be set for a target with L = 0");
  return 1.0 / ctx.L;
}

Vector init_mean(const Context& ctx) { return Vector::Constant(ctx.d, ctx.cfg.init_mean); }

SamplerConfig sampler_config(const Context& ctx, RgoMode mode) {
  SamplerConfig s;
  s.steps = ctx.cfg.steps;
  s.rgo_mode = mode;
  s.output = ctx.cfg.output;
  s.smoothed.delta = ctx.cfg.delta;
  s.smoothed.smoothing_variance = ctx.cfg.smoothing_variance;
  s.smoothed.inner.method = ctx.cfg.inner_method;
  s.smoothed.inner.step_size = ctx.cfg.inner_step;
  s.smoothed.inner.n_steps = ctx.cfg.inner_steps;
  s.smoothed.inner.burn_in = ctx.cfg.inner_burn_in;
  if (mode != RgoMode::smoothed) {
    if (ctx.cfg.h_over_L > 0.0) {
      s.h = ctx.cfg.h_over_L / ctx.L;
    } else {
      s.h = ctx.cfg.h;
    }
  } else if (ctx.cfg.h_over_L > 0.0 || ctx.cfg.h > 0.0) {
    s.h = ctx.cfg.h_over_L > 0.0 ? ctx.cfg.h_over_L / ctx.L : ctx.cfg.h;
  }
  return s;
}

double step_size(const Context& ctx, RgoMode mode = RgoMode::exact_rejection) {
  return sampler_config(ctx, mode).resolved_h(ctx.pot);
}

Grid base_grid(const Context& ctx, double h) {
  const int nodes = ctx.cfg.grid_nodes > 0 ? ctx.cfg.grid_nodes : (ctx.d == 1 ? 4096 : 96);
  if (ctx.cfg.grid_min < ctx.cfg.grid_max) {
    std::vector<Axis> axes(static_cast<std::size_t>(ctx.d), Axis{ctx.cfg.grid_min, ctx.cfg.grid_max, nodes});
    return Grid(axes);
  }
  if (ctx.cfg.init == "tilted") {
    const Vector centre = ctx.pot.mode_hint().value_or(Vector::Zero(ctx.d));
    return choose_grid(ctx.pot, centre, 1.0 / ctx.L, h, nodes);
  }
  return choose_grid(ctx.pot, init_mean(ctx), init_variance(ctx), h, nodes);
}

Grid widen(const Grid& g, int attempt) {
  if (attempt == 0) return g;
  const double w = std::pow(kGridWidening, attempt);
  std::vector<Axis> axes;
  for (int k = 0; k < g.dim(); ++k) {
    const Axis& a = g.axis(k);
    const double c = 0.5 * (a.min + a.max), half = 0.5 * (a.max - a.min) * w;
    axes.push_back({c - half, c + half, static_cast<int>(std::ceil(a.n * w))});
  }
  return Grid(axes);
}

GridDensity initial_density(const Context& ctx, const Grid& g) {
  if (ctx.cfg.init == "tilted") {
    const double c = ctx.cfg.init_tilt;
    if (!(std::abs(c) < 1.0)) throw ConfigError("init_tilt must lie in (-1, 1)");
    const Potential& p = ctx.pot;
    return GridDensity::from_log_density(
        g, [&p, c](const Vector& x) { return -p.value(x) + std::log1p(c * std::tanh(2.0 * x(0))); });
  }
  return GridDensity::gaussian(g, init_mean(ctx), init_variance(ctx));
}

InitSampler init_sampler(const Context& ctx) {
  if (ctx.cfg.init != "gaussian") throw ConfigError("Monte Carlo modes need init = gaussian");
  const Vector m = init_mean(ctx);
  const double sd = std::sqrt(init_variance(ctx));
  return [m, sd](Rng& rng) -> Vector { return m + sd * standard_normal(static_cast<int>(m.size()), rng); };
}

// Runs fn on the configured grid, widening it after a GridError.
template <class Fn>
auto on_grid(Context& ctx, double h, Fn fn) {
  const Grid base = base_grid(ctx, h);
  for (int attempt = 0;; ++attempt) {
    const Grid g = widen(base, attempt);
    try {
      auto out = fn(g);
      const Axis& a = g.axis(0);
      ctx.report.summary["grid"] = {{"min", a.min}, {"max", a.max}, {"nodes", a.n}, {"dim", g.dim()}};
      ctx.report.summary["grid_retries"] = attempt;
      return out;
    } catch (const GridError&) {
      if (attempt + 1 >= kGridAttempts) throw;
    }
  }
}

Series trace_series(const ChannelTrace& t) {
  Series s;
  s.columns = {"k", "kl_x", "fi_x", "kl_y", "fi_y", "chi_sq_x", "renyi2_x", "cumulative_fi"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < t.x.size(); ++k) {
    const auto& x = t.x[k];
    const auto r2 = x.renyi.find(2);
    s.rows.push_back({static_cast<double>(k), x.kl, x.fi, k < t.y.size() ? t.y[k].kl : nan,
                      k < t.y.size() ? t.y[k].fi : nan, x.chi_sq, r2 == x.renyi.end() ? nan : r2->second,
                      t.cumulative_fi[k]});
  }
  return s;
}

void add_step_rows(Context& ctx, const std::string& prefix, const std::vector<StepCheck>& checks) {
  for (const auto& c : checks) {
    const std::string k = std::to_string(c.step);
    ctx.check(prefix + "step" + k + "_forward", c.forward, kInequalityTolerance);
    ctx.check(prefix + "step" + k + "_backward_fi", c.backward_fi, kInequalityTolerance);
    ctx.check(prefix + "step" + k + "_backward_kl", c.backward_kl, kInequalityTolerance);
  }
}

// ---------------------------------------------------------------------------

void verify_ideal(Context& ctx) {
  const double h = step_size(ctx);
  const int K = ctx.cfg.steps;
  const auto trace = on_grid(ctx, h, [&](const Grid& g) {
    return run_ideal_chain(initial_density(ctx, g), ctx.pot, h, K);
  });
  add_step_rows(ctx, "", check_step_inequalities(trace, h, ctx.L));
  const double bound = total_fi_bound(trace.kl0(), h, ctx.L);
  ctx.row("total_fi_bound", trace.total_fi(), bound, kInequalityTolerance);
  const double avg_bound = averaged_fi_bound(trace.kl0(), h, ctx.L, K);
  ctx.row("averaged_fi_bound", trace.averaged.fi, avg_bound, kInequalityTolerance);
  auto& sm = ctx.report.summary;
  if (ctx.gaussian && ctx.d == 1 && ctx.cfg.init == "gaussian") {
    const auto laws = gaussian_ideal_laws(*ctx.gaussian, {init_mean(ctx), init_variance(ctx)}, h, K);
    double closed = 0.0;
    for (int k = 1; k <= K; ++k) closed += gaussian_closed_form(laws[k], *ctx.gaussian, DivergenceId::fi);
    ctx.row("gaussian_closed_form_total_fi", std::abs(trace.total_fi() - closed), 0.0, 1e-6 * std::max(1.0, closed));
    sm["closed_form_total_fi"] = closed;
  }
  ctx.report.series["trace"] = trace_series(trace);
  sm["h"] = h;
  sm["L"] = ctx.L;
  sm["K"] = K;
  sm["kl0"] = number(trace.kl0());
  sm["total_fi"] = number(trace.total_fi());
  sm["total_fi_bound"] = number(bound);
  sm["averaged_fi"] = number(trace.averaged.fi);
  sm["averaged_fi_bound"] = number(avg_bound);
  sm["max_drift"] = trace.max_drift;
}

void verify_perturbed(Context& ctx) {
  const double h = step_size(ctx);
  Series s;
  s.columns = {"eps_mix", "k", "chi_sq_x", "chi_sq_envelope", "eps_chi_sq_sq"};
  nlohmann::json per_eps = nlohmann::json::array();
  for (double eps : ctx.cfg.eps_mix) {
    const auto trace = on_grid(ctx, h, [&](const Grid& g) {
      return run_perturbed_chain(initial_density(ctx, g), ctx.pot, h, ctx.cfg.steps, eps);
    });
    const std::string prefix = "eps" + fmt(eps) + "_";
    for (const auto& c : check_chi_sq_growth(trace)) {
      ctx.check(prefix + "chi_sq_k" + std::to_string(c.step), c.check, kInequalityTolerance);
      s.rows.push_back({eps, static_cast<double>(c.step), c.check.lhs, c.check.rhs, trace.eps_chi_sq_sq});
    }
    per_eps.push_back({{"eps_mix", eps}, {"eps_chi_sq_sq", number(trace.eps_chi_sq_sq)},
                       {"chi_sq0", number(trace.x.front().chi_sq)}});
  }
  ctx.report.series["chi_sq"] = s;
  ctx.report.summary["h"] = h;
  ctx.report.summary["perturbations"] = per_eps;
}

// FI(N(mu, s) | N(m, v)) in 1D with a delta-method standard error.
std::pair<double, double> gaussian_fi_proxy(const Moments& mo, const GaussianForm& target) {
  const double m = target.mean(0), v = target.variance;
  const double mu = mo.mean, s = mo.variance;
  const double fi = (s - v) * (s - v) / (s * v * v) + (mu - m) * (mu - m) / (v * v);
  const double d_mu = 2.0 * (mu - m) / (v * v);
  const double d_s = (s - v) * (s + v) / (s * s * v * v);
  return {fi, std::hypot(d_mu * mo.mean_se, d_s * mo.variance_se)};
}

void monte_carlo(Context& ctx, RgoMode mode) {
  const SamplerConfig sampler = sampler_config(ctx, mode);
  sampler.validate(ctx.pot);
  const double h = sampler.resolved_h(ctx.pot);
  const int K = sampler.steps;
  const auto init = init_sampler(ctx);
  auto& sm = ctx.report.summary;
  sm["h"] = h;
  sm["K"] = K;
  sm["chains"] = ctx.cfg.chains;

  // Grid reference law of each iterate (1D).
  std::optional<ChannelTrace> ref;
  if (ctx.d == 1) {
    const bool exact = mode != RgoMode::smoothed ||
                       (ctx.cfg.inner_method == InnerMethod::exact_gaussian &&
                        sampler.smoothed.smoothing_variance_for(1, ctx.L) == 0.0);
    if (exact) {
      ref = on_grid(ctx, h, [&](const Grid& g) { return run_ideal_chain(initial_density(ctx, g), ctx.pot, h, K); });
      sm["reference"] = "ideal_chain";
    } else if (ctx.cfg.inner_method != InnerMethod::ula) {
      SmoothedChannelConfig sc;
      sc.smoothing_variance = sampler.smoothed.smoothing_variance_for(1, ctx.L);
      sc.mala_step = ctx.cfg.inner_step;
      sc.mala_steps = sampler.smoothed.inner.total_steps();
      sc.exact_inner = ctx.cfg.inner_method == InnerMethod::exact_gaussian;
      ref = on_grid(ctx, h, [&](const Grid& g) { return run_smoothed_chain(initial_density(ctx, g), ctx.pot, K, sc); });
      sm["reference"] = "smoothed_chain_law";
    }
  }

  Series s;
  s.columns = {"seed", "k", "mean", "variance", "fi_proxy", "fi_grid"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::uint64_t seed : ctx.cfg.seeds) {
    const auto runs = run_chains(ctx.pot, sampler, init, seed, ctx.cfg.chains, true);
    const std::string prefix = "seed" + std::to_string(seed) + "_";
    QueryLedger total;
    for (const auto& r : runs) total += r.ledger;
    ctx.report.queries += total;
    const double expected_prox = static_cast<double>(ctx.cfg.chains) * K;
    ctx.row(prefix + "prox_calls_exact", std::abs(static_cast<double>(total.prox_calls) - expected_prox), 0.0, 0.0);
    if (mode == RgoMode::smoothed && ctx.cfg.inner_method != InnerMethod::exact_gaussian) {
      const double expected_inner = expected_prox * sampler.smoothed.inner.total_steps();
      ctx.row(prefix + "inner_steps_exact", std::abs(static_cast<double>(total.inner_steps) - expected_inner), 0.0,
              0.0);
    }
    if (mode == RgoMode::exact_rejection) {
      sm["mean_trials_" + std::to_string(seed)] =
          static_cast<double>(total.f_evals - total.prox_calls) / static_cast<double>(total.prox_calls);
    }
    for (int k = 0; k <= K; ++k) {
      std::vector<double> xs;
      xs.reserve(runs.size());
      for (const auto& r : runs) xs.push_back(r.path[static_cast<std::size_t>(k)](0));
      const auto mo = moments(xs);
      double fp = nan, fg = nan;
      if (ref) fg = ref->x[static_cast<std::size_t>(k)].fi;
      if (ctx.gaussian && ctx.d == 1) {
        const auto [fi, se] = gaussian_fi_proxy(mo, *ctx.gaussian);
        fp = fi;
        if (ref && k > 0) ctx.row(prefix + "fi_proxy_k" + std::to_string(k), std::abs(fi - fg), 3.0 * se, 0.0);
      }
      s.rows.push_back({static_cast<double>(seed), static_cast<double>(k), mo.mean, mo.variance, fp, fg});
    }
    if (ref) {
      std::vector<double> last;
      for (const auto& r : runs) last.push_back(r.path.back()(0));
      const double crit = ks_critical_value(runs.size(), 0.001);
      ctx.row(prefix + "ks_final", ks_statistic(last, ref->final_x), crit, 0.0);
      if (sampler.output == OutputMode::random_iterate) {
        std::vector<double> out;
        for (const auto& r : runs) out.push_back(r.output(0));
        ctx.row(prefix + "ks_random_iterate", ks_statistic(out, ref->averaged_x), crit, 0.0);
      }
    }
  }
  ctx.report.series["mc_moments"] = s;
}

void mc_smoothed(Context& ctx) {
  monte_carlo(ctx, RgoMode::smoothed);
  if (ctx.d != 1 || ctx.cfg.inner_method == InnerMethod::ula) return;
  // Grid-tracked FI of the smoothed chain against the ideal chain.
  const double h = 0.5 / ctx.L;
  const SamplerConfig sampler = sampler_config(ctx, RgoMode::smoothed);
  SmoothedChannelConfig sc;
  sc.smoothing_variance = sampler.smoothed.smoothing_variance_for(1, ctx.L);
  sc.mala_step = ctx.cfg.inner_step;
  sc.mala_steps = sampler.smoothed.inner.total_steps();
  sc.exact_inner = ctx.cfg.inner_method == InnerMethod::exact_gaussian;
  const auto pair = on_grid(ctx, h, [&](const Grid& g) {
    const auto rho0 = initial_density(ctx, g);
    return std::make_pair(run_ideal_chain(rho0, ctx.pot, h, ctx.cfg.steps),
                          run_smoothed_chain(rho0, ctx.pot, ctx.cfg.steps, sc));
  });
  Series s;
  s.columns = {"k", "fi_ideal", "fi_smoothed"};
  for (int k = 0; k <= ctx.cfg.steps; ++k) {
    const double fi_i = pair.first.x[static_cast<std::size_t>(k)].fi;
    const double fi_s = pair.second.x[static_cast<std::size_t>(k)].fi;
    s.rows.push_back({static_cast<double>(k), fi_i, fi_s});
    if (k > 0) ctx.row("smoothed_fi_within_2x_k" + std::to_string(k), fi_s, 2.0 * fi_i, kInequalityTolerance);
  }
  ctx.report.series["smoothed_fi"] = s;
  ctx.report.summary["smoothing_variance"] = sc.smoothing_variance;
}

void ula_baseline(Context& ctx) {
  Series s;
  s.columns = {"seed", "eta", "variance", "predicted", "standard_error"};
  const auto init = init_sampler(ctx);
  for (double eta : ctx.cfg.ula_step) {
    if (!(eta > 0.0) || !(eta * ctx.L < 1.0)) throw ConfigError("ula_step " + fmt(eta) + " violates 0 < step < 1/L");
    for (std::uint64_t seed : ctx.cfg.seeds) {
      Rng rng = make_stream(seed, 0);
      const auto path = ula_chain(ctx.pot, eta, static_cast<int>(ctx.cfg.ula_length), init, rng);
      ctx.report.queries += path.queries;
      const std::string prefix = "seed" + std::to_string(seed) + "_eta" + fmt(eta) + "_";
      ctx.row(prefix + "grad_evals_exact",
              std::abs(static_cast<double>(path.queries.grad_evals) - static_cast<double>(ctx.cfg.ula_length)), 0.0,
              0.0);
      if (ctx.d != 1) continue;
      const std::size_t burn = std::min<std::size_t>(path.path.size() / 10, 10000);
      const double centre = ctx.gaussian ? ctx.gaussian->mean(0) : 0.0;
      std::vector<double> sq;
      sq.reserve(path.path.size() - burn);
      for (std::size_t k = burn; k < path.path.size(); ++k) {
        const double dx = path.path[k](0) - centre;
        sq.push_back(dx * dx);
      }
      const double var = moments(sq).mean;
      const double se = batch_means_se(sq, 100);
      double predicted = std::numeric_limits<double>::quiet_NaN();
      if (ctx.gaussian) {
        const double v = ctx.gaussian->variance;
        predicted = v / (1.0 - eta / (2.0 * v));
        ctx.row(prefix + "stationary_variance", std::abs(var - predicted), 3.0 * se, 0.0);
      }
      s.rows.push_back({static_cast<double>(seed), eta, var, predicted, se});
    }
  }
  ctx.report.series["ula_variance"] = s;

  if (ctx.cfg.ula_budget > 0 && ctx.d == 1) {
    // Queries per proximal iteration, measured on exact-rejection chains.
    SamplerConfig sampler = sampler_config(ctx, RgoMode::exact_rejection);
    const double h = sampler.resolved_h(ctx.pot);
    const auto runs = run_chains(ctx.pot, sampler, init, ctx.cfg.seeds.front(), 1000);
    QueryLedger q;
    for (const auto& r : runs) q += r.ledger;
    const double per_iter = static_cast<double>(q.total()) / static_cast<double>(q.prox_calls);
    const long budget = ctx.cfg.ula_budget;
    const int k_prox = std::max(1, static_cast<int>(std::floor(budget / per_iter)));
    const double eta = ctx.cfg.ula_compare_step;
    const auto both = on_grid(ctx, std::max(h, eta), [&](const Grid& g) {
      const auto rho0 = initial_density(ctx, g);
      return std::make_pair(run_ideal_chain(rho0, ctx.pot, h, k_prox),
                            run_ula_law(rho0, ctx.pot, eta, static_cast<int>(budget)));
    });
    ctx.row("budget_ordering_fi", both.first.averaged.fi, both.second.averaged.fi, 0.0, false);
    ctx.report.summary["budget"] = {{"queries", budget},
                                    {"queries_per_prox_iteration", per_iter},
                                    {"prox_iterations", k_prox},
                                    {"ula_steps", budget},
                                    {"fi_prox_averaged", number(both.first.averaged.fi)},
                                    {"fi_ula_averaged", number(both.second.averaged.fi)}};
  }
}

void restart(Context& ctx) {
  require_restart_target(ctx.pot);
  const double h = step_size(ctx);
  RestartConfig rc;
  rc.alpha = ctx.pot.strong_convexity();
  rc.epsilon_final = ctx.cfg.epsilon_final;
  if (ctx.cfg.restart_rounds > 0) rc.rounds_override = ctx.cfg.restart_rounds;
  const auto trace = on_grid(ctx, h, [&](const Grid& g) {
    return run_restart_grid(ctx.pot, rc, h, initial_density(ctx, g));
  });
  Series s;
  s.columns = {"round", "accuracy", "steps", "kl_start", "kl_end", "fi_averaged", "renyi2_end"};
  for (const auto& r : trace.rounds) {
    const std::string k = "round" + std::to_string(r.round) + "_";
    ctx.row(k + "kl_halves", r.kl_end, 0.5 * r.kl_start, 1e-12);
    ctx.row(k + "kl_induction", r.kl_end, trace.kl0 * std::pow(0.5, r.round + 1), 1e-12);
    ctx.row(k + "schedule_exact", std::abs(r.accuracy - rc.alpha * trace.kl0 * std::pow(0.5, r.round)), 0.0, 0.0);
    ctx.row(k + "fi_target_met", r.fi_averaged, r.accuracy, kInequalityTolerance);
    s.rows.push_back({static_cast<double>(r.round), r.accuracy, static_cast<double>(r.steps), r.kl_start, r.kl_end,
                      r.fi_averaged, r.renyi2_end});
  }
  ctx.report.series["restart"] = s;
  auto& sm = ctx.report.summary;
  sm["h"] = h;
  sm["alpha"] = rc.alpha;
  sm["kl0"] = number(trace.kl0);
  if (ctx.cfg.init == "gaussian" && trace.kl0 > 0.0) {
    // Monte Carlo restart fed with the measured KL0.
    RestartConfig mc = rc;
    mc.kl0 = trace.kl0;
    SamplerConfig sampler = sampler_config(ctx, RgoMode::exact_rejection);
    const auto init = init_sampler(ctx);
    std::vector<double> xs;
    QueryLedger q;
    for (int c = 0; c < ctx.cfg.chains; ++c) {
      Rng rng = make_stream(ctx.cfg.seeds.front(), static_cast<std::uint64_t>(c));
      const auto run = run_restart(ctx.pot, mc, sampler, init, rng);
      xs.push_back(run.x(0));
      q += run.ledger;
    }
    ctx.report.queries += q;
    const auto mo = moments(xs);
    sm["monte_carlo"] = {{"chains", ctx.cfg.chains}, {"mean", mo.mean}, {"variance", mo.variance},
                         {"prox_calls", q.prox_calls}};
  }
}

void sweep_epsilon(Context& ctx) {
  const double h = step_size(ctx);
  const auto sw = on_grid(ctx, h, [&](const Grid& g) {
    return sweep_averaged_fi(initial_density(ctx, g), ctx.pot, h, ctx.cfg.epsilons, ctx.cfg.max_steps);
  });
  const double slope = log_log_slope(sw.epsilons, sw.first_k);
  Series s;
  s.columns = {"epsilon", "k_star", "averaged_fi"};
  long unreached = 0;
  for (std::size_t i = 0; i < sw.epsilons.size(); ++i) {
    s.rows.push_back({sw.epsilons[i], static_cast<double>(sw.first_k[i]), sw.averaged_fi_at_k[i]});
    if (sw.first_k[i] < 0) ++unreached;
  }
  ctx.row("all_epsilons_reached", static_cast<double>(unreached), 0.0, 0.0);
  ctx.row("slope_at_least_1.6", 1.6, slope, 0.0);
  ctx.row("slope_at_most_2.4", slope, 2.4, 0.0);
  ctx.report.series["sweep"] = s;
  auto& sm = ctx.report.summary;
  sm["h"] = h;
  sm["kl0"] = number(sw.kl0);
  sm["slope"] = number(slope);
}

void check_lemmas(Context& ctx) {
  Rng rng = make_stream(ctx.cfg.seeds.front(), 0);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> log_var(std::log(0.75), std::log(1.4));
  for (int i = 0; i < ctx.cfg.lemma_triples; ++i) {
    const int d = dim(rng);
    auto draw = [&] { return GaussianForm{standard_normal(d, rng), std::exp(log_var(rng))}; };
    const GaussianForm mu = draw(), nu = draw(), pi = draw();
    ctx.check("kl_decomposition_" + std::to_string(i), check_kl_decomposition(mu, nu, pi), 0.0);
  }
  if (ctx.cfg.heat_orders.empty()) return;
  if (ctx.d != 1) throw ConfigError("heat-flow checks need a one-dimensional target");
  const Grid g = Grid::line(-25.0, 25.0, 4001);
  const auto pi = GridDensity::target(g, ctx.pot);
  Series s;
  s.columns = {"q", "t", "actual", "closed_form", "bound"};
  nlohmann::json skipped = nlohmann::json::array();
  for (int q : ctx.cfg.heat_orders) {
    std::vector<double> times = ctx.cfg.heat_times;
    for (double c : ctx.cfg.heat_scaled_times) times.push_back(c / q);
    for (double t : times) {
      if (!(ctx.L * q * t < 1.0)) {
        skipped.push_back({{"q", q}, {"t", t}});
        continue;
      }
      const auto c = check_renyi_after_heat(pi, ctx.L, t, q);
      const std::string tag = "q" + std::to_string(q) + "_t" + fmt(t);
      ctx.check("renyi_after_heat_" + tag, c, 1e-9);
      double closed = std::numeric_limits<double>::quiet_NaN();
      if (ctx.gaussian) {
        const GaussianForm heated{ctx.gaussian->mean, ctx.gaussian->variance + t};
        closed = gaussian_closed_form(heated, *ctx.gaussian, DivergenceId::renyi, q);
        ctx.row("renyi_closed_form_" + tag, std::abs(c.lhs - closed), 0.0, 1e-6);
      }
      s.rows.push_back({static_cast<double>(q), t, c.lhs, closed, c.rhs});
    }
  }
  ctx.report.series["heat"] = s;
  if (!skipped.empty()) ctx.report.summary["heat_skipped_outside_domain"] = skipped;
}

}  // namespace

Potential with_smoothness(const Potential& potential, double smoothness) {
  Potential::Spec spec;
  spec.dim = potential.dim();
  spec.value = [potential](const Vector& x) { return potential.value(x); };
  spec.gradient = [potential](const Vector& x) { return potential.gradient(x); };
  if (potential.has_hessian()) spec.hessian = [potential](const Vector& x) { return potential.hessian(x); };
  spec.smoothness = smoothness;
  spec.strong_convexity = std::min(potential.strong_convexity(), smoothness);
  spec.mode_hint = potential.mode_hint();
  spec.gaussian = potential.gaussian();
  return Potential(std::move(spec));
}

std::size_t RunReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(slack.begin(), slack.end(), [](const SlackRow& r) { return r.asserted && !r.pass(); }));
}

int exit_code(const RunReport& report) { return report.passed() ? 0 : 1; }

RunReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  Context ctx{config, resolve_target(config), std::nullopt, 0.0, 1, report};
  ctx.gaussian = ctx.pot.gaussian();
  ctx.L = ctx.pot.smoothness();
  ctx.d = ctx.pot.dim();
  try {
    switch (config.mode) {
      case ExperimentMode::verify_ideal: verify_ideal(ctx); break;
      case ExperimentMode::verify_perturbed: verify_perturbed(ctx); break;
      case ExperimentMode::mc_exact:
        monte_carlo(ctx, config.rgo_mode == RgoMode::grid_reference ? RgoMode::grid_reference
                                                                     : RgoMode::exact_rejection);
        break;
      case ExperimentMode::mc_smoothed: mc_smoothed(ctx); break;
      case ExperimentMode::ula_baseline: ula_baseline(ctx); break;
      case ExperimentMode::restart: restart(ctx); break;
      case ExperimentMode::sweep_epsilon: sweep_epsilon(ctx); break;
      case ExperimentMode::check_lemmas: check_lemmas(ctx); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " [mode=" + to_string(config.mode) + ", target=" + config.target + "]");
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["mode"] = to_string(report.config.mode);
  j["target"] = report.config.target;
  nlohmann::json cfg = nlohmann::json::object();
  std::istringstream in(serialize_config(report.config));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    cfg[line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["config"] = cfg;
  j["passed"] = report.passed();
  j["failures"] = report.failures();
  j["slack_table"] = nlohmann::json::array();
  for (const auto& r : report.slack) {
    j["slack_table"].push_back({{"name", r.name},
                                {"lhs", number(r.lhs)},
                                {"rhs", number(r.rhs)},
                                {"slack", number(r.slack())},
                                {"tolerance", r.tolerance},
                                {"asserted", r.asserted},
                                {"pass", r.pass()}});
  }
  j["series"] = nlohmann::json::object();
  for (const auto& [name, s] : report.series) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : s.rows) {
      nlohmann::json r = nlohmann::json::array();
      for (double v : row) r.push_back(number(v));
      rows.push_back(r);
    }
    j["series"][name] = {{"columns", s.columns}, {"rows", rows}};
  }
  j["summary"] = report.summary;
  j["queries"] = {{"f_evals", report.queries.f_evals},
                  {"grad_evals", report.queries.grad_evals},
                  {"prox_calls", report.queries.prox_calls},
                  {"inner_steps", report.queries.inner_steps}};
  return j;
}

namespace {
std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string slack_table_csv(const std::vector<SlackRow>& rows) {
  std::string out = "name,lhs,rhs,slack,pass\n";
  for (const auto& r : rows) {
    out += r.name + ',' + csv_number(r.lhs) + ',' + csv_number(r.rhs) + ',' + csv_number(r.slack()) + ',' +
           (r.pass() ? "true" : "false") + (r.asserted ? "" : " (recorded)") + '\n';
  }
  return out;
}

std::string series_csv(const Series& s) {
  std::string out;
  for (std::size_t i = 0; i < s.columns.size(); ++i) out += (i ? "," : "") + s.columns[i];
  out += '\n';
  for (const auto& row : s.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_number(row[i]);
    out += '\n';
  }
  return out;
}

void write_report(const RunReport& report, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error("cannot create output directory '" + directory + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(directory) / name, std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write '" + (fs::path(directory) / name).string() + "'");
  };
  write("report.json", to_json(report).dump(2) + '\n');
  write("config.txt", serialize_config(report.config));
  write("slack_table.csv", slack_table_csv(report.slack));
  for (const auto& [name, s] : report.series) write(name + ".csv", series_csv(s));
  char buf[64];
  std::snprintf(buf, sizeof buf, "{\"wall_seconds\": %.3f}\n", report.wall_seconds);
  write("timing.json", buf);
}

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "fi_vs_k") return PlotKind::fi_vs_k;
  if (s == "kl_vs_k") return PlotKind::kl_vs_k;
  if (s == "queries_vs_epsilon") return PlotKind::queries_vs_epsilon;
  if (s == "slack_table") return PlotKind::slack_table;
  throw ConfigError("unknown series kind '" + s + "'");
}

std::string to_string(PlotKind k) {
  switch (k) {
    case PlotKind::fi_vs_k: return "fi_vs_k";
    case PlotKind::kl_vs_k: return "kl_vs_k";
    case PlotKind::queries_vs_epsilon: return "queries_vs_epsilon";
    case PlotKind::slack_table: return "slack_table";
  }
  return "fi_vs_k";
}

std::string emit_plot_data(const nlohmann::json& report, PlotKind kind) {
  std::string head = "# series: " + to_string(kind) + '\n';
  std::string columns;
  switch (kind) {
    case PlotKind::fi_vs_k:
      head += "# units: k is the iteration index; fi is FI(rho_k | pi) in squared inverse length units\n";
      head += "# tests: sum_{k=1}^{K} FI(rho_k | pi) <= KL(rho_0 | pi) / (h (1 - L h / 2))\n";
      columns = "k,fi\n";
      break;
    case PlotKind::kl_vs_k:
      head += "# units: k is the iteration index; kl is KL(rho_k | pi) in nats\n";
      head += "# tests: each step lowers KL by at least h (1 - h L) / 2 times the forward-step FI\n";
      columns = "k,kl\n";
      break;
    case PlotKind::queries_vs_epsilon:
      head += "# units: epsilon is the FI accuracy (FI <= epsilon^2); k_star and prox_calls count iterations\n";
      head += "# tests: the first K with FI(averaged iterate | pi) <= epsilon^2 grows like L KL0 / epsilon^2\n";
      columns = "epsilon,k_star,prox_calls\n";
      break;
    case PlotKind::slack_table:
      head += "# units: lhs, rhs and slack = rhs - lhs in the units of each inequality\n";
      head += "# tests: every asserted inequality of the run; pass is false when slack < -tolerance\n";
      columns = "name,lhs,rhs,slack,pass\n";
      break;
  }
  std::string out = head + columns;
  char buf[128];

  if (kind == PlotKind::slack_table) {
    if (!report.contains("slack_table")) return out;
    for (const auto& r : report.at("slack_table")) {
      out += r.at("name").get<std::string>();
      for (const char* key : {"lhs", "rhs", "slack"}) {
        std::snprintf(buf, sizeof buf, ",%.17g", read_number(r.at(key)));
        out += buf;
      }
      out += r.at("pass").get<bool>() ? ",true\n" : ",false\n";
    }
    return out;
  }

  const std::string wanted = kind == PlotKind::queries_vs_epsilon ? "sweep" : "trace";
  const bool empty = !report.contains("series") || report.at("series").empty();
  if (empty) return out;
  if (!report.at("series").contains(wanted)) {
    throw MissingSeries("report has no '" + wanted + "' series for " + to_string(kind));
  }
  const auto& s = report.at("series").at(wanted);
  const auto cols = s.at("columns").get<std::vector<std::string>>();
  auto col = [&](const std::string& name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw MissingSeries("series '" + wanted + "' has no column '" + name + "'");
    return static_cast<std::size_t>(it - cols.begin());
  };
  std::vector<std::vector<double>> rows;
  for (const auto& r : s.at("rows")) {
    std::vector<double> v;
    for (const auto& x : r) v.push_back(read_number(x));
    rows.push_back(v);
  }
  if (kind == PlotKind::queries_vs_epsilon) {
    const std::size_t ie = col("epsilon"), ik = col("k_star");
    std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return a[ie] > b[ie]; });
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r[ie], r[ik], r[ik]);
      out += buf;
    }
    return out;
  }
  const std::size_t ik = col("k"), iv = col(kind == PlotKind::fi_vs_k ? "fi_x" : "kl_x");
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r[ik], r[iv]);
    out += buf;
  }
  return out;
}

}  // namespace proxfi
