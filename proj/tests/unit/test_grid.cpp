#include <cmath>

#include "doctest.h"
#include "proxfi/errors.hpp"
#include "proxfi/grid.hpp"

using namespace proxfi;

TEST_SUITE("grid") {

TEST_CASE("axis geometry and flat indexing") {
  const Grid g = Grid::square({-1.0, 1.0, 5}, {0.0, 4.0, 9});
  CHECK(g.dim() == 2);
  CHECK(g.size() == 45);
  CHECK(g.cell_volume() == doctest::Approx(0.5 * 0.5));
  CHECK(g.stride(0) == 9);
  CHECK(g.stride(1) == 1);
  const auto idx = g.multi_index(2 * 9 + 7);
  CHECK(idx[0] == 2);
  CHECK(idx[1] == 7);
  const Vector x = g.node(2 * 9 + 7);
  CHECK(x(0) == doctest::Approx(0.0));
  CHECK(x(1) == doctest::Approx(3.5));
}

TEST_CASE("invalid grids and densities") {
  CHECK_THROWS_AS(Grid::line(0.0, 1.0, 4), GridError);
  CHECK_THROWS_AS(Grid::line(1.0, 1.0, 10), GridError);
  CHECK_THROWS_AS(Grid(std::vector<Axis>{}), GridError);
  const Grid g = Grid::line(0.0, 1.0, 5);
  CHECK_THROWS_AS(GridDensity(g, {1, 2, 3}), GridError);
  CHECK_THROWS_AS(GridDensity(g, {1, 2, -3, 0, 0}), GridError);
  CHECK_THROWS_AS(GridDensity(g, {1, 2, NAN, 0, 0}), GridError);
  CHECK_THROWS_AS(GridDensity(g, {0, 0, 0, 0, 0}).normalize(), GridError);
  CHECK_THROWS_AS(require_same_grid(GridDensity(g, {1, 1, 1, 1, 1}),
                                    GridDensity(Grid::line(0.0, 2.0, 5), {1, 1, 1, 1, 1})),
                  GridError);
}

TEST_CASE("gaussian moments by quadrature") {
  const Grid g = Grid::line(-12.0, 14.0, 4096);
  const auto d = GridDensity::gaussian(g, Vector::Constant(1, 1.0), 2.0);
  CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.mean()(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.covariance()(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  const Grid g2 = Grid::square({-10, 10, 161}, {-10, 11, 161});
  Vector m(2);
  m << 0.5, 1.0;
  const auto d2 = GridDensity::gaussian(g2, m, 1.5);
  CHECK((d2.mean() - m).norm() < 1e-10);
  CHECK(d2.covariance()(0, 0) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(std::abs(d2.covariance()(0, 1)) < 1e-10);
}

TEST_CASE("normalisation reports drift") {
  const Grid g = Grid::line(0.0, 4.0, 5);
  GridDensity d(g, {1, 1, 1, 1, 1});
  CHECK(d.normalize() == doctest::Approx(4.0));
  CHECK(d.mass() == doctest::Approx(1.0));
}

TEST_CASE("averaging and cumulative distribution") {
  const Grid g = Grid::line(-10.0, 10.0, 2001);
  const auto a = GridDensity::gaussian(g, Vector::Constant(1, -1.0), 1.0);
  const auto b = GridDensity::gaussian(g, Vector::Constant(1, 1.0), 1.0);
  const std::vector<GridDensity> both{a, b};
  const auto avg = average(both);
  CHECK(std::abs(avg.mean()(0)) < 1e-12);
  CHECK(avg.covariance()(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
  const auto cdf = cumulative(avg);
  CHECK(cdf.front() == 0.0);
  CHECK(cdf.back() == 1.0);
  CHECK(interpolate_cdf(g, cdf, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(interpolate_cdf(g, cdf, -20.0) == 0.0);
  CHECK(interpolate_cdf(g, cdf, 20.0) == 1.0);
  CHECK(interpolate_cdf(g, cdf, 0.005) > 0.5);
}

}
