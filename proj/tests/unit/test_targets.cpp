#include <cmath>
#include <random>

#include "doctest.h"
#include "proxfi/errors.hpp"
#include "proxfi/grid.hpp"
#include "proxfi/targets.hpp"

using namespace proxfi;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

const char* const kCatalog[] = {"gaussian(0,1)", "gaussian(1,4)", "gaussian2d(0.5,-1,2)", "mixture2(-2,2,1)",
                                "doublewell(1,4)", "doublewell2d(1,4)"};

}  // namespace

TEST_SUITE("targets") {

TEST_CASE("gaussian values and constants") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  CHECK(g.value1(0.0) == 0.0);
  CHECK(g.derivative1(0.0) == 0.0);
  CHECK(g.value1(2.0) == doctest::Approx(2.0));
  CHECK(g.derivative1(2.0) == doctest::Approx(2.0));
  const auto h = make_gaussian(v1(1.0), 4.0);
  CHECK(h.smoothness() == 0.25);
  CHECK(h.strong_convexity() == 0.25);
  CHECK(h.condition_number() == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_gaussian(v1(0.0), 0.0), InvalidParameter);
  CHECK_THROWS_AS(make_gaussian(v1(0.0), -1.0), InvalidParameter);
}

TEST_CASE("mixture reduces to a gaussian with one component") {
  const auto m = make_gaussian_mixture({1.0}, {v1(0.7)}, 2.0);
  const auto g = make_gaussian(v1(0.7), 2.0);
  for (double x : {-3.0, 0.0, 0.7, 2.5}) {
    CHECK(m.value1(x) == doctest::Approx(g.value1(x)));
    CHECK(m.derivative1(x) == doctest::Approx(g.derivative1(x)));
  }
}

TEST_CASE("symmetric mixture") {
  const auto m = make_gaussian_mixture({0.5, 0.5}, {v1(-2.0), v1(2.0)}, 1.0);
  CHECK(std::abs(m.derivative1(0.0)) < 1e-15);
  CHECK(m.smoothness() == doctest::Approx(17.0));
  CHECK(m.strong_convexity() == 0.0);
  CHECK(std::isinf(m.condition_number()));
  // f(0) - f(2) against the log ratio of the normalised grid density.
  const Grid grid = Grid::line(-10.0, 10.0, 2001);
  const auto pi = GridDensity::target(grid, m);
  const double grid_diff = std::log(pi[1200] / pi[1000]);  // nodes at 2 and 0
  CHECK(std::abs(grid_diff - (m.value1(0.0) - m.value1(2.0))) < 1e-10);
  CHECK_THROWS_AS(make_gaussian_mixture({0.5, 0.6}, {v1(0), v1(1)}, 1.0), InvalidParameter);
  CHECK_THROWS_AS(make_gaussian_mixture({}, {}, 1.0), InvalidParameter);
  CHECK_THROWS_AS(make_gaussian_mixture({1.2, -0.2}, {v1(0), v1(1)}, 1.0), InvalidParameter);
}

TEST_CASE("double well stationary points and certified constant") {
  const auto w = make_double_well(1.0, 4.0);
  CHECK(w.derivative1(0.0) == 0.0);
  CHECK(w.derivative1(1.0) == 0.0);
  CHECK(w.smoothness() == 47.0);
  double worst = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double x = -10.0 + i * 1e-4;
    worst = std::max(worst, std::abs(double_well_second_derivative(1.0, 4.0, x)));
  }
  CHECK(std::abs(worst - w.smoothness()) < 1e-9);
  CHECK_THROWS_AS(make_double_well(1.0, 0.5), InvalidParameter);
  CHECK_THROWS_AS(make_double_well(1.0, 1.5), InvalidParameter);  // too much mass beyond the clip
  CHECK_THROWS_AS(make_double_well(-1.0, 4.0), InvalidParameter);
}

TEST_CASE("mixture constant bounds the dense-grid second derivative") {
  const auto m = make_gaussian_mixture({0.5, 0.5}, {v1(-2.0), v1(2.0)}, 1.0);
  double worst = 0.0;
  for (int i = 0; i <= 20000; ++i) worst = std::max(worst, std::abs(m.hessian(v1(-10.0 + i * 1e-3))(0, 0)));
  CHECK(worst <= m.smoothness());
  CHECK(worst == doctest::Approx(3.0).epsilon(1e-6));  // |1 - 4| at the midpoint
}

TEST_CASE("finite-difference gradient check on random probes") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n01(0.0, 1.5);
  for (const char* name : kCatalog) {
    const auto entry = parse_target(name);
    const auto& p = entry.potential;
    for (int probe = 0; probe < 100; ++probe) {
      Vector x(p.dim()), e(p.dim());
      for (int k = 0; k < p.dim(); ++k) {
        x(k) = n01(rng);
        e(k) = n01(rng);
      }
      e.normalize();
      const double eps = 1e-5;
      const double fd = (p.value(x + eps * e) - p.value(x - eps * e)) / (2 * eps);
      const double an = p.gradient(x).dot(e);
      CHECK_MESSAGE(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)), name);
    }
  }
}

TEST_CASE("smoothness and strong convexity witnesses") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01(0.0, 3.0);
  for (const char* name : kCatalog) {
    const auto entry = parse_target(name);
    const auto& p = entry.potential;
    for (int probe = 0; probe < 200; ++probe) {
      Vector x(p.dim()), y(p.dim());
      for (int k = 0; k < p.dim(); ++k) {
        x(k) = n01(rng);
        y(k) = n01(rng);
      }
      const Vector dg = p.gradient(x) - p.gradient(y);
      CHECK(dg.norm() <= p.smoothness() * (x - y).norm() * (1 + 1e-12));
      if (p.strong_convexity() > 0) {
        CHECK(dg.dot(x - y) >= p.strong_convexity() * (x - y).squaredNorm() * (1 - 1e-12));
      }
    }
  }
}

TEST_CASE("quadrature normalisation matches the closed form") {
  const auto entry = parse_target("gaussian(1,4)");
  const Grid grid = Grid::line(-25.0, 27.0, 4001);
  const auto pi = GridDensity::target(grid, entry.potential);
  CHECK(pi.mean()(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(pi.covariance()(0, 0) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("catalog grammar") {
  CHECK(parse_target(" gaussian( 0 , 1 ) ").name == "gaussian(0,1)");
  CHECK(std::holds_alternative<GaussianForm>(parse_target("gaussian(0,1)").closed_form));
  CHECK(std::holds_alternative<MixtureForm>(parse_target("mixture2(-2,2,1)").closed_form));
  CHECK(parse_target("doublewell2d(1,4)").potential.dim() == 2);
  CHECK(parse_target("gaussian2d(0,0,1)").potential.dim() == 2);
  CHECK_THROWS_AS(parse_target("banana(1)"), ConfigError);
  CHECK_THROWS_AS(parse_target("gaussian(0)"), ConfigError);
  CHECK_THROWS_AS(parse_target("gaussian(0,x)"), ConfigError);
  CHECK_THROWS_AS(parse_target("gaussian(0,-1)"), ConfigError);
  CHECK_THROWS_AS(parse_target("gaussian"), ConfigError);
}

TEST_CASE("dimension mismatches are errors") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  CHECK_THROWS_AS(g.value(Vector::Zero(2)), DimensionMismatch);
  CHECK_THROWS_AS(g.gradient(Vector::Zero(3)), DimensionMismatch);
  const auto g2 = make_gaussian(Vector::Zero(2), 1.0);
  CHECK_THROWS_AS(g2.value1(0.0), DimensionMismatch);
}

}
