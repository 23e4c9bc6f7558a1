#pragma once

// Uniform tensor grids in one or two dimensions and densities sampled on them.
// Integrals use the composite rectangle rule sum_i v_i * cell_volume, which is
// the trapezoid rule for integrands that vanish at the boundary and converges
// spectrally for smooth, rapidly decaying densities.

#include <functional>
#include <span>
#include <vector>

#include "proxfi/targets.hpp"

namespace proxfi {

struct Axis {
  double min = 0.0;
  double max = 1.0;
  int n = 2;

  double spacing() const { return (max - min) / (n - 1); }
  double node(int i) const { return min + i * spacing(); }
  friend bool operator==(const Axis&, const Axis&) = default;
};

class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<Axis> axes);
  static Grid line(double min, double max, int n);
  static Grid square(const Axis& a0, const Axis& a1);

  int dim() const noexcept { return static_cast<int>(axes_.size()); }
  const Axis& axis(int k) const { return axes_.at(k); }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept { return cell_volume_; }

  // Row-major: the last axis varies fastest.
  std::size_t stride(int k) const { return k + 1 == dim() ? 1 : static_cast<std::size_t>(axes_.back().n); }
  std::vector<int> multi_index(std::size_t flat) const;
  Vector node(std::size_t flat) const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.axes_ == b.axes_; }

 private:
  std::vector<Axis> axes_;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(Grid grid, std::vector<double> values);

  // exp(log_density) evaluated at the nodes, shifted by its maximum, normalised.
  static GridDensity from_log_density(const Grid& grid, const std::function<double(const Vector&)>& log_density);
  static GridDensity gaussian(const Grid& grid, const Vector& mean, double variance);
  // pi ∝ exp(-f) on the grid.
  static GridDensity target(const Grid& grid, const Potential& potential);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double mass() const;
  // Rescales to unit mass and returns |mass_before - 1|.
  double normalize();

  Vector mean() const;
  Matrix covariance() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

// Checks identical grids, throwing GridError otherwise.
void require_same_grid(const GridDensity& a, const GridDensity& b);

// Mixture sum_i w_i * rho_i (weights need not be normalised; result is).
GridDensity average(std::span<const GridDensity> densities);

// 1D cumulative distribution at the nodes (trapezoid), pinned to [0, 1].
std::vector<double> cumulative(const GridDensity& density);

// Linear interpolation of a 1D nodal CDF at x.
double interpolate_cdf(const Grid& grid, std::span<const double> cdf, double x);

}  // namespace proxfi
