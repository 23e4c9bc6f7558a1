#include <cmath>

#include "doctest.h"
#include "proxfi/chain.hpp"
#include "proxfi/divergences.hpp"
#include "proxfi/errors.hpp"
#include "proxfi/stats.hpp"

using namespace proxfi;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

InitSampler normal_init(double mean, double var) {
  return [mean, var](Rng& rng) { return v1(mean + std::sqrt(var) * standard_normal(rng)); };
}

}  // namespace

TEST_SUITE("chain") {

TEST_CASE("step size defaults and validation") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  SamplerConfig cfg;
  CHECK(cfg.resolved_h(g) == doctest::Approx(0.5));
  CHECK(cfg.resolved_h(parse_target("gaussian2d(0,0,1)").potential) == doctest::Approx(1.0 / 3.0));
  cfg.rgo_mode = RgoMode::smoothed;
  CHECK(cfg.resolved_h(g) == doctest::Approx(0.5));
  cfg.h = 0.25;
  CHECK_THROWS_AS(cfg.resolved_h(g), InvalidParameter);
  cfg = SamplerConfig{};
  cfg.h = 1.0;
  CHECK_THROWS_AS(cfg.validate(g), PreconditionError);
  cfg.h = 0.5;
  cfg.output = OutputMode::averaged_density;
  CHECK_THROWS_AS(cfg.validate(g), InvalidParameter);
  CHECK(parse_rgo_mode("smoothed") == RgoMode::smoothed);
  CHECK(parse_output_mode("final") == OutputMode::final_iterate);
  CHECK_THROWS_AS(parse_rgo_mode("ideal"), ConfigError);
}

TEST_CASE("Gaussian iterate means follow the closed-form recursion") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  SamplerConfig cfg;
  cfg.h = 0.5;
  cfg.steps = 20;
  const auto runs = run_chains(g, cfg, normal_init(2.0, 1.0), 31, 20000, true);
  for (int k = 0; k <= 20; ++k) {
    std::vector<double> xs;
    for (const auto& r : runs) xs.push_back(r.path[k](0));
    const auto m = moments(xs);
    // Variance recursion v' = (v + h)/(1 + h)^2 + h/(1 + h) keeps v = 1.
    INFO("k=", k);
    CHECK(std::abs(m.mean - 2.0 / std::pow(1.5, k)) < 3.0 * m.mean_se);
    CHECK(std::abs(m.variance - 1.0) < 3.0 * m.variance_se);
  }
}

TEST_CASE("ledger exactness and monotone counters") {
  const auto dw = make_double_well(1.0, 4.0);
  SamplerConfig cfg;
  cfg.steps = 15;
  Rng rng = make_stream(1, 0);
  const auto run = run_proximal_chain(dw, cfg, normal_init(1.0, 0.1), rng, true);
  CHECK(run.ledger.prox_calls == 15u);
  CHECK(run.ledger.grad_evals == 15u);
  CHECK(run.ledger.f_evals >= 30u);
  CHECK(run.ledger.inner_steps == 0u);
  for (std::size_t i = 1; i < run.rows.size(); ++i) {
    CHECK(run.rows[i].counters.f_evals > run.rows[i - 1].counters.f_evals);
    CHECK(run.rows[i].counters.prox_calls == run.rows[i - 1].counters.prox_calls + 1);
  }
  CHECK(run.selected >= 1);
  CHECK(run.selected <= 15);
  CHECK(run.output(0) == run.path[run.selected](0));

  cfg.rgo_mode = RgoMode::smoothed;
  cfg.smoothed.inner.n_steps = 30;
  cfg.smoothed.inner.burn_in = 5;
  const auto sm = run_proximal_chain(dw, cfg, normal_init(1.0, 0.1), rng);
  CHECK(sm.ledger.prox_calls == 15u);
  CHECK(sm.ledger.inner_steps == 15u * 35u);
  CHECK(sm.ledger.f_evals == 15u * 36u);
  CHECK(sm.ledger.grad_evals == 15u * 36u);
}

TEST_CASE("runs are bitwise reproducible across worker counts") {
  const auto dw = make_double_well(1.0, 4.0);
  SamplerConfig cfg;
  cfg.steps = 10;
  const auto a = run_chains(dw, cfg, normal_init(0.0, 1.0), 99, 64, true, 1);
  const auto b = run_chains(dw, cfg, normal_init(0.0, 1.0), 99, 64, true, 7);
  const std::string csv = ledger_csv(a);
  CHECK(csv == ledger_csv(b));
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + 64 * 11);
}

TEST_CASE("starting at the target keeps the target") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  SamplerConfig cfg;
  cfg.h = 0.5;
  cfg.steps = 5;
  cfg.output = OutputMode::final_iterate;
  const auto runs = run_chains(g, cfg, normal_init(0.0, 1.0), 5, 20000);
  std::vector<double> xs;
  for (const auto& r : runs) xs.push_back(r.output(0));
  const auto m = moments(xs);
  CHECK(std::abs(m.mean) < 3.0 * m.mean_se);
  CHECK(std::abs(m.variance - 1.0) < 3.0 * m.variance_se);
}

TEST_CASE("one step matches the grid oracle") {
  const auto dw = make_double_well(1.0, 4.0);
  const double h = 0.5 / dw.smoothness();
  SamplerConfig cfg;
  cfg.h = h;
  cfg.steps = 1;
  const auto runs = run_chains(dw, cfg, normal_init(2.0, 0.25), 8, 20000);
  std::vector<double> xs;
  for (const auto& r : runs) xs.push_back(r.output(0));
  const Grid grid = choose_grid(dw, v1(2.0), 0.25, h, 4096);
  const auto trace = run_ideal_chain(GridDensity::gaussian(grid, v1(2.0), 0.25), dw, h, 1);
  CHECK(ks_statistic(xs, trace.final_x) < ks_critical_value(xs.size(), 0.001));

  cfg.rgo_mode = RgoMode::grid_reference;
  const auto ref = run_chains(dw, cfg, normal_init(2.0, 0.25), 8, 5000);
  xs.clear();
  for (const auto& r : ref) xs.push_back(r.output(0));
  CHECK(ks_statistic(xs, trace.final_x) < ks_critical_value(xs.size(), 0.001));
}

TEST_CASE("restart schedule") {
  RestartConfig r;
  r.alpha = 1.0;
  r.kl0 = 2.0;
  r.epsilon_final = 0.25;
  const auto s = r.schedule();
  REQUIRE(s.size() == 5);
  CHECK(s[0] == 2.0);
  CHECK(s[1] == 1.0);
  CHECK(s[2] == 0.5);
  CHECK(s[4] == 0.125);
  CHECK(s.back() <= 2.0 * r.alpha * r.epsilon_final * r.epsilon_final);
  CHECK(s[s.size() - 2] > 2.0 * r.alpha * r.epsilon_final * r.epsilon_final);
  CHECK(restart_round_steps(1.0, 0.5, 1.0) == 3);
  r.alpha = 0.0;
  CHECK_THROWS_AS(r.rounds(), PreconditionError);
  CHECK_THROWS_AS(require_restart_target(make_double_well(1.0, 4.0)), PreconditionError);
}

TEST_CASE("restart halves KL on the grid") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  const Grid grid = choose_grid(g, v1(2.0), 1.0, 0.5, 2048);
  RestartConfig r;
  r.rounds_override = 5;
  const auto trace = run_restart_grid(g, r, 0.5, GridDensity::gaussian(grid, v1(2.0), 1.0));
  CHECK(trace.kl0 == doctest::Approx(2.0).epsilon(1e-6));
  REQUIRE(trace.rounds.size() == 5);
  for (const auto& round : trace.rounds) {
    CHECK(round.kl_end <= 0.5 * round.kl_start + 1e-12);
    CHECK(round.kl_end <= trace.kl0 / std::ldexp(1.0, round.round + 1) + 1e-12);
    CHECK(round.fi_averaged <= round.accuracy + 1e-9);
  }
}

TEST_CASE("restart initialisation bound for anisotropic Gaussians") {
  // pi = N(0, diag(1/L, 1/alpha)), rho0 = N(0, I/L).
  for (double kappa : {1.0, 2.0, 10.0, 100.0}) {
    const double kl = 0.5 * (1.0 / kappa - 1.0 + std::log(kappa));
    CHECK(kl <= 0.5 * 2.0 * std::log(kappa) + 1e-15);
  }
  const auto g = make_gaussian(v1(0.0), 1.0);
  Rng rng = make_stream(1, 0);
  RestartConfig r;
  r.alpha = 1.0;
  r.kl0 = 2.0;
  r.epsilon_final = 0.25;
  const auto run = run_restart(g, r, SamplerConfig{}, {}, rng);
  CHECK(run.round_steps.size() == 5);
  CHECK(run.ledger.prox_calls == 15u);
}

TEST_CASE("ULA baseline ledger") {
  const auto dw = make_double_well(1.0, 4.0);
  Rng rng = make_stream(3, 0);
  const auto run = run_ula_baseline(dw, 0.01, 1000, normal_init(1.0, 0.01), rng);
  CHECK(run.ledger.grad_evals == 1000u);
  CHECK(run.ledger.f_evals == 0u);
  CHECK(run.selected >= 1);
}

}
