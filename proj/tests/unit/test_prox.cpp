#include <cmath>
#include <random>

#include "doctest.h"
#include "proxfi/errors.hpp"
#include "proxfi/prox.hpp"

using namespace proxfi;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

Potential cosine_potential() {
  Potential::Spec s;
  s.dim = 1;
  s.value = [](const Vector& x) { return std::cos(x(0)); };
  s.gradient = [](const Vector& x) -> Vector { return v1(-std::sin(x(0))); };
  s.hessian = [](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, -std::cos(x(0))); };
  s.smoothness = 1.0;
  return Potential(std::move(s));
}

}  // namespace

TEST_SUITE("prox") {

TEST_CASE("zero potential is the identity") {
  const auto z = make_zero(2);
  Vector y(2);
  y << 0.3, -4.0;
  CHECK((prox(z, 7.0, y) - y).norm() == 0.0);
  CHECK(verify_prox_optimality(z, 7.0, y, y) == 0.0);
}

TEST_CASE("quadratic closed form y/(1+h)") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  for (double h : {0.1, 0.5, 0.9}) {
    for (double y : {-3.0, 1.0, 2.5}) {
      const Vector x = prox(g, h, v1(y));
      CHECK(x(0) == doctest::Approx(y / (1 + h)).epsilon(1e-10));
      CHECK(verify_prox_optimality(g, h, v1(y), v1(y / (1 + h))) <= 1e-12);
    }
  }
  // h = 1/L leaves the strongly convex regime the solver is specified for.
  CHECK_THROWS_AS(prox(g, 1.0, v1(1.0)), PreconditionError);
  CHECK_THROWS_AS(prox(g, 0.0, v1(1.0)), PreconditionError);
}

TEST_CASE("optimality residual by direct evaluation") {
  const auto g = make_gaussian(v1(0.0), 1.0);
  CHECK(verify_prox_optimality(g, 1.0, v1(1.0), v1(0.6)) == doctest::Approx(0.2));
}

TEST_CASE("even potential has its prox at the origin") {
  const auto c = cosine_potential();
  CHECK(std::abs(prox(c, 0.5, v1(0.0))(0)) < 1e-14);
  ProxConfig newton;
  newton.method = ProxMethod::damped_newton_1d;
  CHECK(std::abs(prox(c, 0.5, v1(0.0), newton)(0)) < 1e-14);
}

TEST_CASE("gradient descent and Newton agree on non-convex targets") {
  const auto w = make_double_well(1.0, 4.0);
  const double h = 0.5 / w.smoothness();
  ProxConfig newton;
  newton.method = ProxMethod::damped_newton_1d;
  for (double y : {-3.0, -0.2, 0.0, 0.4, 1.7, 5.0}) {
    const auto gd = prox_solve(w, h, v1(y), {});
    const auto nt = prox_solve(w, h, v1(y), newton);
    CHECK(gd.x(0) == doctest::Approx(nt.x(0)).epsilon(1e-9));
    CHECK(gd.residual <= ProxConfig{}.tolerance_for(h));
    CHECK(nt.iterations <= gd.iterations);
  }
}

TEST_CASE("objective decreases along gradient descent") {
  const auto m = make_gaussian_mixture({0.5, 0.5}, {v1(-2), v1(2)}, 1.0);
  const double h = 0.9 / m.smoothness();
  const auto r = prox_solve(m, h, v1(0.8), {}, nullptr, true);
  REQUIRE(r.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-15);
  }
}

TEST_CASE("contraction bound on random pairs") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01(0.0, 2.0);
  for (const char* name : {"mixture2(-2,2,1)", "doublewell(1,4)", "doublewell2d(1,4)"}) {
    const auto e = parse_target(name);
    const auto& p = e.potential;
    for (double frac : {0.1, 0.5, 0.9}) {
      const double h = frac / p.smoothness();
      for (int i = 0; i < 25; ++i) {
        Vector y1(p.dim()), y2(p.dim());
        for (int k = 0; k < p.dim(); ++k) {
          y1(k) = n01(rng);
          y2(k) = n01(rng);
        }
        const double lhs = (prox(p, h, y1) - prox(p, h, y2)).norm();
        CHECK(lhs <= (y1 - y2).norm() / (1 - h * p.smoothness()) + 1e-9);
      }
    }
  }
}

TEST_CASE("ledger and failure reporting") {
  const auto w = make_double_well(1.0, 4.0);
  QueryLedger ledger;
  const auto r = prox_solve(w, 0.01, v1(2.0), {}, &ledger);
  CHECK(ledger.prox_calls == 1);
  CHECK(ledger.grad_evals == static_cast<std::uint64_t>(r.iterations + 1));
  ProxConfig tight;
  tight.max_iterations = 1;
  tight.grad_tolerance = 1e-300;
  try {
    prox_solve(w, 0.01, v1(2.0), tight);
    FAIL("expected non-convergence");
  } catch (const NonConvergence& e) {
    CHECK(e.final_residual() > 0.0);
  }
  ProxConfig bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(prox(w, 0.01, v1(0.0), bad), InvalidParameter);
  CHECK_THROWS_AS(prox(w, 0.01, Vector::Zero(2)), DimensionMismatch);
}

}
