#include "proxfi/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "proxfi/errors.hpp"

namespace proxfi {

std::string to_string(RgoMode m) {
  switch (m) {
    case RgoMode::exact_rejection: return "exact_rejection";
    case RgoMode::smoothed: return "smoothed";
    case RgoMode::grid_reference: return "grid_reference";
  }
  return "exact_rejection";
}

std::string to_string(OutputMode m) {
  switch (m) {
    case OutputMode::random_iterate: return "random_iterate";
    case OutputMode::averaged_density: return "averaged_density";
    case OutputMode::final_iterate: return "final";
  }
  return "random_iterate";
}

RgoMode parse_rgo_mode(const std::string& s) {
  if (s == "exact_rejection") return RgoMode::exact_rejection;
  if (s == "smoothed") return RgoMode::smoothed;
  if (s == "grid_reference") return RgoMode::grid_reference;
  throw ConfigError("unknown rgo mode '" + s + "'");
}

OutputMode parse_output_mode(const std::string& s) {
  if (s == "random_iterate") return OutputMode::random_iterate;
  if (s == "averaged_density") return OutputMode::averaged_density;
  if (s == "final") return OutputMode::final_iterate;
  throw ConfigError("unknown output mode '" + s + "'");
}

double SamplerConfig::resolved_h(const Potential& potential) const {
  const double L = potential.smoothness();
  if (rgo_mode == RgoMode::smoothed) {
    if (!(L > 0.0)) throw PreconditionError("smoothed oracle needs L > 0");
    const double fixed = 0.5 / L;
    if (h != 0.0 && std::abs(h - fixed) > 1e-12 * fixed) {
      throw InvalidParameter("smoothed oracle fixes h = 1/(2L)");
    }
    return fixed;
  }
  if (h != 0.0) return h;
  if (!(L > 0.0)) throw PreconditionError("default step needs L > 0");
  return 1.0 / (L * (potential.dim() + 1));
}

void SamplerConfig::validate(const Potential& potential) const {
  if (steps < 1) throw InvalidParameter("chain needs at least one iteration");
  const double hh = resolved_h(potential);
  if (!(hh > 0.0) || !(hh * potential.smoothness() < 1.0)) throw PreconditionError("step size must satisfy 0 < h < 1/L");
  if (output == OutputMode::averaged_density) {
    throw InvalidParameter("averaged_density output is only available from the grid oracle");
  }
  if (rgo_mode == RgoMode::smoothed) smoothed.inner.validate();
  if (rgo_mode == RgoMode::grid_reference) {
    if (potential.dim() != 1) throw InvalidParameter("grid_reference oracle is one-dimensional");
    if (reference_nodes < 5) throw InvalidParameter("grid_reference oracle needs at least 5 nodes");
  }
}

double sample_grid_density(const GridDensity& density, std::span<const double> cdf, Rng& rng) {
  const Axis& a = density.grid().axis(0);
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - cdf.begin(), 1, cdf.size() - 1)) - 1;
  const double width = cdf[i + 1] - cdf[i];
  const double frac = width > 0.0 ? (u - cdf[i]) / width : 0.5;
  return a.node(static_cast<int>(i)) + frac * a.spacing();
}

namespace {

// R_y is (1/h - L)-strongly log-concave, so +-12 of its standard deviations
// around the prox point hold all but e^{-72} of its mass.
Vector grid_reference_draw(const Potential& potential, double h, const Vector& y, int nodes, Rng& rng) {
  const double centre = prox(potential, h, y)(0);
  const double half = 12.0 / std::sqrt(1.0 / h - potential.smoothness());
  const Grid g = Grid::line(centre - half, centre + half, nodes);
  const auto r = rgo_conditional_density(g, potential, h, y);
  const auto cdf = cumulative(r);
  return Vector::Constant(1, sample_grid_density(r, cdf, rng));
}

}  // namespace

ChainRun run_proximal_chain(const Potential& potential, const SamplerConfig& config, const InitSampler& init,
                            Rng& rng, bool record, int chain_id) {
  config.validate(potential);
  const double h = config.resolved_h(potential);
  const double L = potential.smoothness();
  const double root_h = std::sqrt(h);
  ChainRun run;
  if (config.output == OutputMode::random_iterate) {
    run.selected = std::uniform_int_distribution<int>(1, config.steps)(rng);
  } else {
    run.selected = config.steps;
  }
  ChainState state;
  state.x = init(rng);
  if (state.x.size() != potential.dim()) throw DimensionMismatch("initial point has the wrong dimension");
  if (record) {
    run.path.push_back(state.x);
    run.rows.push_back({chain_id, 0, state.counters, state.x});
  }
  for (state.k = 1; state.k <= config.steps; ++state.k) {
    const Vector y = state.x + root_h * standard_normal(potential.dim(), rng);
    switch (config.rgo_mode) {
      case RgoMode::exact_rejection: {
        auto draw = rgo_exact(potential, h, y, rng, config.rejection);
        state.x = std::move(draw.x);
        state.counters += draw.stats.queries;
        break;
      }
      case RgoMode::smoothed: {
        auto draw = rgo_smoothed(potential, L, y, config.smoothed, rng);
        state.x = std::move(draw.x);
        state.counters += draw.queries;
        break;
      }
      case RgoMode::grid_reference:
        state.x = grid_reference_draw(potential, h, y, config.reference_nodes, rng);
        break;
    }
    if (state.k == run.selected) run.output = state.x;
    if (record) {
      run.path.push_back(state.x);
      run.rows.push_back({chain_id, state.k, state.counters, state.x});
    }
  }
  run.ledger = state.counters;
  return run;
}

std::vector<ChainRun> run_chains(const Potential& potential, const SamplerConfig& config, const InitSampler& init,
                                 std::uint64_t seed, int chains, bool record, int workers) {
  if (chains < 1) throw InvalidParameter("need at least one chain");
  config.validate(potential);
  std::vector<ChainRun> out(static_cast<std::size_t>(chains));
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, chains);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      for (int c = w; c < chains; c += workers) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(c));
        out[static_cast<std::size_t>(c)] = run_proximal_chain(potential, config, init, rng, record, c);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string ledger_csv(const std::vector<ChainRun>& runs) {
  std::string out = "chain_id,k,f_evals,grad_evals,prox_calls,inner_steps";
  const int d = runs.empty() || runs.front().rows.empty() ? 0 : static_cast<int>(runs.front().rows.front().x.size());
  for (int i = 0; i < d; ++i) out += ",x" + std::to_string(i);
  out += '\n';
  char buf[64];
  for (const auto& r : runs) {
    for (const auto& row : r.rows) {
      out += std::to_string(row.chain_id) + ',' + std::to_string(row.k) + ',' + std::to_string(row.counters.f_evals) +
             ',' + std::to_string(row.counters.grad_evals) + ',' + std::to_string(row.counters.prox_calls) + ',' +
             std::to_string(row.counters.inner_steps);
      for (int i = 0; i < row.x.size(); ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g", row.x(i));
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

double RestartConfig::accuracy(int round) const { return alpha * kl0 / std::ldexp(1.0, round); }

int RestartConfig::rounds() const {
  if (rounds_override) return *rounds_override;
  if (!(alpha > 0.0)) throw PreconditionError("restart needs a strongly log-concave target (alpha > 0)");
  if (!(kl0 > 0.0) || !(epsilon_final > 0.0)) throw InvalidParameter("restart needs kl0 > 0 and epsilon_final > 0");
  const double stop = 2.0 * alpha * epsilon_final * epsilon_final;
  int k = 0;
  while (accuracy(k) > stop) ++k;
  return k + 1;
}

std::vector<double> RestartConfig::schedule() const {
  std::vector<double> s;
  const int n = rounds();
  for (int k = 0; k < n; ++k) s.push_back(accuracy(k));
  return s;
}

long restart_round_steps(double alpha, double h, double smoothness) {
  if (!(alpha > 0.0)) throw PreconditionError("restart needs alpha > 0");
  if (!(h > 0.0) || !(h * smoothness < 1.0)) throw PreconditionError("step size must satisfy 0 < h < 1/L");
  return static_cast<long>(std::ceil(1.0 / (alpha * h * (1.0 - 0.5 * smoothness * h)) - 1e-12));
}

void require_restart_target(const Potential& potential) {
  if (!(potential.strong_convexity() > 0.0)) throw PreconditionError("restart needs alpha > 0");
  if (!potential.mode_hint() || potential.mode_hint()->norm() > 1e-12) {
    throw PreconditionError("restart needs a target with its mode at the origin");
  }
}

InitSampler restart_initialisation(const Potential& potential) {
  const double sd = 1.0 / std::sqrt(potential.smoothness());
  const int d = potential.dim();
  return [sd, d](Rng& rng) -> Vector { return sd * standard_normal(d, rng); };
}

RestartTrace run_restart_grid(const Potential& potential, RestartConfig restart, double h, const GridDensity& rho0) {
  require_restart_target(potential);
  const auto pi = GridDensity::target(rho0.grid(), potential);
  restart.alpha = potential.strong_convexity();
  restart.kl0 = kl_grid(rho0, pi);
  RestartTrace trace;
  trace.kl0 = restart.kl0;
  trace.h = h;
  const long steps = restart_round_steps(restart.alpha, h, potential.smoothness());
  GridDensity rho = rho0;
  const int n = restart.rounds();
  for (int k = 0; k < n; ++k) {
    RestartRound r;
    r.round = k;
    r.accuracy = restart.accuracy(k);
    r.steps = steps;
    r.kl_start = kl_grid(rho, pi);
    const auto chain = run_ideal_chain(rho, potential, h, static_cast<int>(steps));
    rho = chain.averaged_x;
    r.fi_averaged = chain.averaged.fi;
    r.kl_end = chain.averaged.kl;
    r.renyi2_end = chain.averaged.renyi.at(2);
    trace.rounds.push_back(r);
  }
  trace.final_density = rho;
  return trace;
}

RestartRun run_restart(const Potential& potential, const RestartConfig& restart, SamplerConfig sampler,
                       const InitSampler& init, Rng& rng) {
  require_restart_target(potential);
  if (!(restart.alpha > 0.0)) throw PreconditionError("restart needs alpha > 0");
  const double h = sampler.resolved_h(potential);
  const long steps = restart_round_steps(restart.alpha, h, potential.smoothness());
  sampler.steps = static_cast<int>(steps);
  sampler.output = OutputMode::random_iterate;
  RestartRun out;
  const InitSampler start = init ? init : restart_initialisation(potential);
  out.x = start(rng);
  const int n = restart.rounds();
  for (int k = 0; k < n; ++k) {
    const Vector from = out.x;
    auto run = run_proximal_chain(potential, sampler, [&from](Rng&) { return from; }, rng);
    out.x = run.output;
    out.ledger += run.ledger;
    out.round_steps.push_back(steps);
  }
  return out;
}

UlaBaselineRun run_ula_baseline(const Potential& potential, double step, int steps, const InitSampler& init,
                                Rng& rng) {
  if (steps < 1) throw InvalidParameter("ULA baseline needs at least one step");
  UlaBaselineRun out;
  out.selected = std::uniform_int_distribution<int>(1, steps)(rng);
  auto path = ula_chain(potential, step, steps, init, rng);
  out.sample = path.path[static_cast<std::size_t>(out.selected)];
  out.ledger = path.queries;
  return out;
}

}  // namespace proxfi
