#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "proxfi/errors.hpp"
#include "proxfi/inner_samplers.hpp"
#include "proxfi/rgo.hpp"
#include "proxfi/stats.hpp"

using namespace proxfi;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

// Full Gaussian log density of the MALA proposal, constants included.
double log_q(const Potential& p, double step, const Vector& from, const Vector& to) {
  const Vector mean = from - step * p.gradient(from);
  const double var = 2.0 * step;
  return -0.5 * (to - mean).squaredNorm() / var - 0.5 * to.size() * std::log(2.0 * M_PI * var);
}

Potential gaussian_nu() {
  const auto g = make_gaussian(v1(0.0), 1.0);
  return build_rescaled_target(g, 1.0, v1(0.0), v1(0.0));
}

}  // namespace

TEST_SUITE("inner_samplers") {

TEST_CASE("MALA log acceptance equals the direct density ratio") {
  const auto dw = make_double_well(1.0, 4.0);
  Rng rng = make_stream(1, 0);
  for (int i = 0; i < 50; ++i) {
    const Vector x = 2.0 * standard_normal(1, rng);
    const Vector xp = x + 0.5 * standard_normal(1, rng);
    const double direct = -dw.value(xp) + dw.value(x) + log_q(dw, 0.05, xp, x) - log_q(dw, 0.05, x, xp);
    CHECK(mala_log_acceptance(dw, 0.05, x, xp) == doctest::Approx(direct).epsilon(1e-12));
  }
  const auto flat = make_zero(2);
  Vector a(2), b(2);
  a << 0.3, -1.0;
  b << 2.0, 0.5;
  CHECK(mala_log_acceptance(flat, 0.1, a, b) == 0.0);
}

TEST_CASE("MALA on the Gaussian rescaled target") {
  const auto nu = gaussian_nu();
  REQUIRE(nu.gaussian());
  CHECK(nu.gaussian()->variance == doctest::Approx(1.0 / 3.0));
  InnerSamplerConfig cfg;
  cfg.step_size = 0.05;
  cfg.n_steps = 500;
  std::vector<double> xs;
  for (int c = 0; c < 10000; ++c) {
    Rng rng = make_stream(5, c);
    xs.push_back(mala_sample(nu, cfg, rng).x(0));
  }
  const auto m = moments(xs);
  CHECK(std::abs(m.variance - 1.0 / 3.0) < 3.0 * m.variance_se);
  CHECK(ks_statistic(xs, [](double x) { return normal_cdf(x, 0.0, 1.0 / 3.0); }) < 0.02);
}

TEST_CASE("MALA query counts and acceptance rates on rescaled catalog targets") {
  for (const char* name : {"gaussian(0,1)", "mixture2(-2,2,1)", "doublewell(1,4)"}) {
    const auto entry = parse_target(name);
    const double L = entry.potential.smoothness();
    const Vector y = v1(0.3);
    const Vector m = prox(entry.potential, 0.5 / L, y);
    const auto nu = build_rescaled_target(entry.potential, L, y, m);
    InnerSamplerConfig cfg;
    cfg.step_size = 0.1 / nu.smoothness();
    cfg.n_steps = 2000;
    cfg.burn_in = 10;
    Rng rng = make_stream(9, 0);
    const auto draw = mala_sample(nu, cfg, rng);
    const double rate = static_cast<double>(draw.accepted) / cfg.total_steps();
    INFO(std::string(name), " acceptance ", rate);
    MESSAGE(std::string(name), " MALA acceptance at step 0.1/L_nu: ", rate);
    CHECK(rate >= 0.4);
    CHECK(rate < 1.0);
    CHECK(draw.queries.f_evals == 2011u);
    CHECK(draw.queries.grad_evals == 2011u);
    CHECK(draw.queries.inner_steps == 2010u);
  }
}

TEST_CASE("inner sampler configuration validation") {
  InnerSamplerConfig cfg;
  cfg.step_size = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg.step_size = 0.1;
  cfg.n_steps = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  CHECK(parse_inner_method("exact_gaussian") == InnerMethod::exact_gaussian);
  CHECK_THROWS_AS(parse_inner_method("hmc"), ConfigError);
}

TEST_CASE("exact Gaussian inner draws") {
  const auto nu = gaussian_nu();
  Rng rng = make_stream(3, 0);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = exact_gaussian_inner(nu, rng)(0);
  const auto m = moments(xs);
  CHECK(std::abs(m.mean) < 3.0 * m.mean_se);
  CHECK(std::abs(m.variance - 1.0 / 3.0) < 3.0 * m.variance_se);
  CHECK(ks_statistic(xs, [](double x) { return normal_cdf(x, 0.0, 1.0 / 3.0); }) < 0.002);

  Rng a = make_stream(8, 1), b = make_stream(8, 1);
  for (int i = 0; i < 100; ++i) CHECK(exact_gaussian_inner(nu, a)(0) == exact_gaussian_inner(nu, b)(0));
  CHECK_THROWS_AS(exact_gaussian_inner(make_double_well(1.0, 4.0), a), InvalidParameter);
}

TEST_CASE("ULA stationary variance on the standard Gaussian") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  const double eta = 0.1;
  Rng rng = make_stream(21, 0);
  const auto path = ula_chain(g, eta, 1000000, [](Rng&) { return v1(0.0); }, rng);
  std::vector<double> sq;
  sq.reserve(path.path.size() - 1000);
  for (std::size_t k = 1000; k < path.path.size(); ++k) sq.push_back(path.path[k](0) * path.path[k](0));
  const double var = moments(sq).mean;
  const double se = batch_means_se(sq, 100);
  CHECK(std::abs(var - 1.0 / (1.0 - eta / 2.0)) < 3.0 * se);
  CHECK(path.queries.grad_evals == 1000000u);
}

TEST_CASE("ULA on a flat potential is a random walk") {
  const auto flat = make_zero();
  const double step = 0.1;
  const int k = 50;
  std::vector<double> end;
  for (int c = 0; c < 20000; ++c) {
    Rng rng = make_stream(4, c);
    end.push_back(ula_chain(flat, step, k, [](Rng&) { return v1(0.0); }, rng).path.back()(0));
  }
  const auto m = moments(end);
  CHECK(std::abs(m.variance - 2.0 * step * k) < 3.0 * m.variance_se);
  Rng rng = make_stream(4, 0);
  CHECK_THROWS_AS(ula_chain(make_gaussian(v1(0.0), 1.0), 1.0, 5, [](Rng&) { return v1(0.0); }, rng),
                  PreconditionError);
}

TEST_CASE("MALA calibration ladder decreases and matches the shipped table") {
  const auto rows = mala_calibration_table();
  for (std::size_t i = 0; i + 1 < 12; ++i) {
    if (rows[i].step != rows[i + 1].step) continue;
    CHECK(rows[i + 1].measured_r3_gaussian < rows[i].measured_r3_gaussian);
    CHECK(rows[i + 1].measured_ks < rows[i].measured_ks);
  }
  std::ifstream in(std::string(PROXFI_SOURCE_DIR) + "/data/mala_calibration.csv");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto shipped = parse_calibration_csv(ss.str());
  REQUIRE(shipped.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(shipped[i].step == rows[i].step);
    CHECK(shipped[i].n_steps == rows[i].n_steps);
    CHECK(std::abs(shipped[i].measured_ks - rows[i].measured_ks) < 1e-12);
    CHECK(std::abs(shipped[i].measured_r3_gaussian - rows[i].measured_r3_gaussian) < 1e-12);
  }
  CHECK(parse_calibration_csv(calibration_csv(rows)).size() == rows.size());
}

}
