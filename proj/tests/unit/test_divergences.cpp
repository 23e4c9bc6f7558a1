#include <cmath>
#include <random>

#include "doctest.h"
#include "proxfi/divergences.hpp"
#include "proxfi/errors.hpp"

using namespace proxfi;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

GaussianForm gf(double m, double v) { return {v1(m), v}; }

const Grid& line() {
  static const Grid g = Grid::line(-20.0, 20.0, 4096);
  return g;
}

GridDensity normal(double m, double v, const Grid& g = line()) { return GridDensity::gaussian(g, v1(m), v); }

}  // namespace

TEST_SUITE("divergences") {

TEST_CASE("identical densities give zero") {
  const auto p = normal(0, 1);
  CHECK(kl_grid(p, p) == 0.0);
  CHECK(fi_grid(p, p) == 0.0);
  CHECK(chi_sq_grid(p, p) == 0.0);
  CHECK(renyi_grid(p, p, 2.0) == 0.0);
  CHECK(renyi_grid(p, p, 0.5) == 0.0);
  CHECK(tv_grid(p, p) == 0.0);
}

TEST_CASE("shifted and scaled gaussians against closed forms") {
  CHECK(kl_grid(normal(1, 1), normal(0, 1)) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(kl_grid(normal(0, 2), normal(0, 1)) - 0.5 * (2 - 1 - std::log(2.0))) < 1e-8);
  CHECK(std::abs(fi_grid(normal(1, 1), normal(0, 1)) - 1.0) < 1e-6);
  CHECK(std::abs(fi_grid(normal(2, 1), normal(0, 1)) - 4.0) < 1e-6);
  CHECK(std::abs(chi_sq_grid(normal(1, 1), normal(0, 1)) - std::expm1(1.0)) < 1e-6);
  CHECK(std::abs(renyi_grid(normal(1, 1), normal(0, 1), 2.0) - 1.0) < 1e-6);
  for (auto [m1, s1, m2, s2] : {std::array{0.3, 0.7, -0.2, 1.3}, std::array{1.0, 1.5, 0.0, 1.0},
                                std::array{-2.0, 0.25, 0.5, 2.0}}) {
    const auto a = gf(m1, s1), b = gf(m2, s2);
    const auto ra = normal(m1, s1), rb = normal(m2, s2);
    CHECK(std::abs(kl_grid(ra, rb) - gaussian_closed_form(a, b, DivergenceId::kl)) < 1e-8);
    CHECK(std::abs(fi_grid(ra, rb) - gaussian_closed_form(a, b, DivergenceId::fi)) < 1e-6);
    CHECK(std::abs(chi_sq_grid(ra, rb) - gaussian_closed_form(a, b, DivergenceId::chi_sq)) < 1e-8);
    const double r3 = gaussian_closed_form(a, b, DivergenceId::renyi, 3.0);
    if (!is_infinite(r3)) CHECK(std::abs(renyi_grid(ra, rb, 3.0) - r3) < 1e-8);
  }
}

TEST_CASE("closed forms") {
  using enum DivergenceId;
  CHECK(gaussian_closed_form(gf(0, 1), gf(0, 1), kl) == 0.0);
  CHECK(gaussian_closed_form(gf(1, 1), gf(0, 1), fi) == 1.0);
  CHECK(gaussian_closed_form(gf(1, 1), gf(0, 1), chi_sq) == doctest::Approx(std::expm1(1.0)));
  // R_2(N(0, 1.25) | N(0, 1)) = -log(1.25 sqrt(0.6)): 0.0323, well below log 2 / 2.
  const double r2 = gaussian_closed_form(gf(0, 1.25), gf(0, 1), renyi, 2.0);
  CHECK(r2 == doctest::Approx(-std::log(1.25 * std::sqrt(0.6))).epsilon(1e-14));
  CHECK(r2 == doctest::Approx(0.0322692).epsilon(1e-5));
  CHECK(std::abs(renyi_grid(normal(0, 1.25), normal(0, 1), 2.0) - r2) < 1e-9);
  // q s2 + (1 - q) s1 <= 0: the integrand is not integrable.
  CHECK(is_infinite(gaussian_closed_form(gf(0, 2), gf(0, 1), renyi, 2.0)));
  CHECK(is_infinite(gaussian_closed_form(gf(0, 2), gf(0, 1), chi_sq)));
  CHECK_THROWS_AS(gaussian_closed_form(gf(0, 1), {Vector::Zero(2), 1.0}, kl), DimensionMismatch);
  CHECK_THROWS_AS(gaussian_closed_form(gf(0, 1), gf(0, 1), renyi, 1.0), InvalidParameter);
}

TEST_CASE("two-dimensional quadrature") {
  const Grid g = Grid::square({-10, 10, 256}, {-10, 10, 256});
  Vector m(2);
  m << 1.0, -0.5;
  const auto rho = GridDensity::gaussian(g, m, 1.0);
  const auto pi = GridDensity::gaussian(g, Vector::Zero(2), 1.0);
  CHECK(std::abs(kl_grid(rho, pi) - 0.625) < 1e-8);
  CHECK(std::abs(fi_grid(rho, pi) - 1.25) < 1e-6);
}

TEST_CASE("ordering invariants hold on grid pairs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mean(-1.5, 1.5), var(0.6, 1.8);
  for (int i = 0; i < 30; ++i) {
    const auto rho = normal(mean(rng), var(rng));
    const auto pi = normal(mean(rng), var(rng));
    const auto r = divergence_report(rho, pi, {2, 3});
    CHECK(2 * r.tv * r.tv <= r.kl + 1e-9);
    if (!is_infinite(r.chi_sq)) {
      CHECK(r.kl <= r.chi_sq + 1e-9);
      CHECK(std::abs(r.renyi.at(2) - std::log1p(r.chi_sq)) < 1e-9);
    }
    CHECK(r.kl <= r.renyi.at(2) + 1e-9);
    CHECK(r.renyi.at(2) <= r.renyi.at(3) + 1e-9);
    CHECK(r.tv <= 1.0);
  }
}

TEST_CASE("quadrature error shrinks at least fourfold when the spacing halves") {
  const auto a = gf(0.4, 0.8), b = gf(0.0, 1.0);
  const double exact = gaussian_closed_form(a, b, DivergenceId::kl);
  double prev = 0.0;
  for (int n : {11, 21, 41}) {
    const Grid g = Grid::line(-8.0, 8.0, n);
    const double err = std::abs(kl_grid(GridDensity::gaussian(g, a.mean, a.variance),
                                        GridDensity::gaussian(g, b.mean, b.variance)) - exact);
    if (prev > 1e-14) CHECK(err <= prev / 4);
    prev = err;
  }
}

TEST_CASE("infinite signals rather than exceptions") {
  const Grid g = Grid::line(0.0, 4.0, 5);
  const GridDensity rho(g, {0, 1, 1, 1, 0});
  const GridDensity pi(g, {0, 0, 1, 1, 1});
  CHECK(is_infinite(kl_grid(rho, pi)));
  CHECK(is_infinite(chi_sq_grid(rho, pi)));
  CHECK(is_infinite(renyi_grid(rho, pi, 2.0)));
  CHECK(is_infinite(fi_grid(rho, pi)));
  CHECK_THROWS_AS(renyi_grid(rho, pi, 1.0), InvalidParameter);
  CHECK_THROWS_AS(kl_grid(rho, normal(0, 1)), GridError);
}

TEST_CASE("fisher information books excluded tail mass") {
  const Grid g = Grid::line(-3.0, 3.0, 301);
  const auto r = fi_grid_detailed(GridDensity::gaussian(g, v1(0.0), 1.0), GridDensity::gaussian(g, v1(0.0), 2.0));
  CHECK(r.excluded_mass > 0.0);
  CHECK(r.excluded_mass < 0.05);
}

TEST_CASE("json round trip keeps infinities") {
  DivergenceReport r;
  r.kl = 0.25;
  r.fi = 1.5;
  r.chi_sq = kInfiniteDivergence;
  r.renyi[2] = kInfiniteDivergence;
  r.renyi[3] = 7.0;
  r.tv = 0.1;
  r.quadrature_error_estimate = 1e-12;
  const auto j = to_json(r);
  CHECK(j.at("chi_sq") == "inf");
  CHECK(j.contains("renyi_2"));
  const auto back = divergence_report_from_json(j);
  CHECK(back.kl == r.kl);
  CHECK(is_infinite(back.chi_sq));
  CHECK(is_infinite(back.renyi.at(2)));
  CHECK(back.renyi.at(3) == 7.0);
  CHECK(back.quadrature_error_estimate == r.quadrature_error_estimate);
}

TEST_CASE("KL decomposition inequality") {
  const auto mu = gf(0.2, 1), nu = gf(0.1, 1), pi = gf(0.0, 1);
  const auto c = check_kl_decomposition(mu, nu, pi);
  CHECK(c.lhs == doctest::Approx(0.015));
  CHECK(c.rhs == doctest::Approx(0.005 + 2.01 * std::sqrt(std::expm1(0.01))));
  CHECK(c.holds(0.0));
  const auto same = check_kl_decomposition(nu, nu, pi);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
  const auto grid_c = check_kl_decomposition(normal(0.2, 1), normal(0.1, 1), normal(0, 1));
  CHECK(grid_c.lhs == doctest::Approx(c.lhs).epsilon(1e-7));
  CHECK(grid_c.rhs == doctest::Approx(c.rhs).epsilon(1e-7));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> m(-2, 2), v(0.3, 3);
  for (int i = 0; i < 200; ++i) {
    CHECK(check_kl_decomposition(gf(m(rng), v(rng)), gf(m(rng), v(rng)), gf(m(rng), v(rng))).holds(0.0));
  }
}

TEST_CASE("Renyi divergence after heat flow") {
  const auto pi = normal(0, 1);
  const auto zero = check_renyi_after_heat(pi, 1.0, 0.0, 2);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  const auto q3 = check_renyi_after_heat(pi, 1.0, 0.1, 3);
  CHECK(q3.rhs == doctest::Approx(0.25 * std::log(1 / 0.7)));
  CHECK(q3.holds(0.0));
  // Heat flow on a Gaussian gives N(0, 1 + t) exactly.
  const auto q2 = check_renyi_after_heat(pi, 1.0, 0.125, 2);
  CHECK(q2.lhs == doctest::Approx(gaussian_closed_form(gf(0, 1.125), gf(0, 1), DivergenceId::renyi, 2.0)).epsilon(1e-7));
  CHECK(q2.rhs == doctest::Approx(0.5 * std::log(1 / 0.75)));
  CHECK_THROWS_AS(check_renyi_after_heat(pi, 1.0, 0.5, 2), PreconditionError);
  CHECK_THROWS_AS(check_renyi_after_heat(pi, 1.0, 0.1, 1), InvalidParameter);
}

}
