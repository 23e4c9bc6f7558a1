#include "proxfi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proxfi/errors.hpp"
#include "proxfi/kernels.hpp"

namespace proxfi {

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 2) throw GridError("grids are one- or two-dimensional");
  size_ = 1;
  cell_volume_ = 1.0;
  for (const auto& a : axes_) {
    if (a.n < 5) throw GridError("grid axes need at least 5 nodes");
    if (!(a.max > a.min)) throw GridError("grid axis has empty extent");
    size_ *= static_cast<std::size_t>(a.n);
    cell_volume_ *= a.spacing();
  }
}

Grid Grid::line(double min, double max, int n) { return Grid({Axis{min, max, n}}); }

Grid Grid::square(const Axis& a0, const Axis& a1) { return Grid({a0, a1}); }

std::vector<int> Grid::multi_index(std::size_t flat) const {
  if (dim() == 1) return {static_cast<int>(flat)};
  const auto n1 = static_cast<std::size_t>(axes_[1].n);
  return {static_cast<int>(flat / n1), static_cast<int>(flat % n1)};
}

Vector Grid::node(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Vector x(dim());
  for (int k = 0; k < dim(); ++k) x(k) = axes_[k].node(idx[k]);
  return x;
}

GridDensity::GridDensity(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw GridError("density values do not match the grid size");
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw GridError("density values must be finite and nonnegative");
  }
}

GridDensity GridDensity::from_log_density(const Grid& grid,
                                          const std::function<double(const Vector&)>& log_density) {
  std::vector<double> logs(grid.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    logs[i] = log_density(grid.node(i));
    mx = std::max(mx, logs[i]);
  }
  if (!std::isfinite(mx)) throw GridError("log density is not finite anywhere on the grid");
  for (auto& l : logs) l = std::exp(l - mx);
  GridDensity d(grid, std::move(logs));
  d.normalize();
  return d;
}

GridDensity GridDensity::gaussian(const Grid& grid, const Vector& mean, double variance) {
  if (!(variance > 0.0)) throw InvalidParameter("gaussian density variance must be positive");
  if (mean.size() != grid.dim()) throw DimensionMismatch("gaussian mean does not match grid dimension");
  return from_log_density(grid, [&](const Vector& x) { return -0.5 * (x - mean).squaredNorm() / variance; });
}

GridDensity GridDensity::target(const Grid& grid, const Potential& potential) {
  if (potential.dim() != grid.dim()) throw DimensionMismatch("target dimension does not match grid dimension");
  return from_log_density(grid, [&](const Vector& x) { return -potential.value(x); });
}

double GridDensity::mass() const { return kernels::sum(values_) * grid_.cell_volume(); }

double GridDensity::normalize() {
  const double m = mass();
  if (!(m > 0.0)) throw GridError("density has no mass on the grid");
  kernels::scale(1.0 / m, values_);
  return std::abs(m - 1.0);
}

Vector GridDensity::mean() const {
  Vector m = Vector::Zero(grid_.dim());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != 0.0) m += values_[i] * grid_.node(i);
  }
  return m * grid_.cell_volume();
}

Matrix GridDensity::covariance() const {
  const Vector m = mean();
  Matrix c = Matrix::Zero(grid_.dim(), grid_.dim());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == 0.0) continue;
    const Vector off = grid_.node(i) - m;
    c += values_[i] * off * off.transpose();
  }
  return c * grid_.cell_volume();
}

void require_same_grid(const GridDensity& a, const GridDensity& b) {
  if (!(a.grid() == b.grid())) throw GridError("densities live on different grids");
}

GridDensity average(std::span<const GridDensity> densities) {
  if (densities.empty()) throw InvalidParameter("cannot average an empty set of densities");
  std::vector<double> acc(densities.front().grid().size(), 0.0);
  const double w = 1.0 / static_cast<double>(densities.size());
  for (const auto& d : densities) {
    require_same_grid(densities.front(), d);
    kernels::axpy(w, d.values(), acc);
  }
  GridDensity out(densities.front().grid(), std::move(acc));
  out.normalize();
  return out;
}

std::vector<double> cumulative(const GridDensity& density) {
  if (density.grid().dim() != 1) throw GridError("cumulative distribution needs a 1D grid");
  const auto v = density.values();
  const double dx = density.grid().axis(0).spacing();
  std::vector<double> cdf(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * (v[i - 1] + v[i]) * dx;
  const double total = cdf.back();
  if (!(total > 0.0)) throw GridError("density has no mass on the grid");
  for (auto& c : cdf) c = std::clamp(c / total, 0.0, 1.0);
  return cdf;
}

double interpolate_cdf(const Grid& grid, std::span<const double> cdf, double x) {
  const Axis& a = grid.axis(0);
  if (x <= a.min) return 0.0;
  if (x >= a.max) return 1.0;
  const double pos = (x - a.min) / a.spacing();
  const auto i = std::min(static_cast<std::size_t>(pos), cdf.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return cdf[i] + frac * (cdf[i + 1] - cdf[i]);
}

}  // namespace proxfi
