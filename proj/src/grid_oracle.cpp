#include "proxfi/grid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "proxfi/errors.hpp"
#include "proxfi/kernels.hpp"
#include "proxfi/prox.hpp"

namespace proxfi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Shape {
  int rows;
  int cols;
};

Shape shape_of(const Grid& g) {
  if (g.dim() == 1) return {1, g.axis(0).n};
  return {g.axis(0).n, g.axis(1).n};
}

// Node coordinates, dim-interleaved.
std::vector<double> node_coordinates(const Grid& g) {
  std::vector<double> xs(g.size() * g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.multi_index(i);
    for (int k = 0; k < g.dim(); ++k) xs[i * g.dim() + k] = g.axis(k).node(idx[k]);
  }
  return xs;
}

std::vector<double> potential_on_grid(const Grid& g, const Potential& potential) {
  if (potential.dim() != g.dim()) throw DimensionMismatch("potential dimension does not match grid dimension");
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = potential.value(g.node(i));
    if (!std::isfinite(f[i])) throw GridError("potential is not finite on the grid");
  }
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// BandedKernel

void BandedKernel::finish_column(std::size_t j) {
  Column& c = cols_[j];
  const std::size_t len = static_cast<std::size_t>(c.rows) * c.cols;
  std::span<double> v(values_.data() + c.offset, len);
  const double dv = grid_.cell_volume();
  const double total = kernels::sum(v) * dv;
  if (!(total > 0.0) || !std::isfinite(total)) throw GridError("kernel column has no mass on the grid");
  kernels::scale(1.0 / total, v);

  const Shape s = shape_of(grid_);
  double edge = 0.0;
  for (int r = 0; r < c.rows; ++r) {
    const int gr = c.row0 + r;
    const bool edge_row = grid_.dim() == 2 && (gr == 0 || gr == s.rows - 1);
    for (int q = 0; q < c.cols; ++q) {
      const int gc = c.col0 + q;
      if (edge_row || gc == 0 || gc == s.cols - 1) edge += v[static_cast<std::size_t>(r) * c.cols + q];
    }
  }
  c.edge_mass = edge * dv;
}

BandedKernel BandedKernel::build(const Grid& grid, const LogWeight& log_weight, double cutoff) {
  if (!(cutoff > 0.0)) throw InvalidParameter("kernel cutoff must be positive");
  BandedKernel k;
  k.grid_ = grid;
  const Shape s = shape_of(grid);
  const std::size_t n = grid.size();
  k.cols_.resize(n);
  std::vector<double> lw(n);
  for (std::size_t j = 0; j < n; ++j) {
    double mx = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      lw[i] = log_weight(j, i);
      mx = std::max(mx, lw[i]);
    }
    if (!std::isfinite(mx)) throw GridError("kernel column has no finite weight on the grid");
    const double thr = mx - cutoff;
    int r_lo = s.rows, r_hi = -1, c_lo = s.cols, c_hi = -1;
    for (int r = 0; r < s.rows; ++r) {
      for (int c = 0; c < s.cols; ++c) {
        if (lw[static_cast<std::size_t>(r) * s.cols + c] >= thr) {
          r_lo = std::min(r_lo, r);
          r_hi = std::max(r_hi, r);
          c_lo = std::min(c_lo, c);
          c_hi = std::max(c_hi, c);
        }
      }
    }
    Column& col = k.cols_[j];
    col.offset = k.values_.size();
    col.row0 = r_lo;
    col.rows = r_hi - r_lo + 1;
    col.col0 = c_lo;
    col.cols = c_hi - c_lo + 1;
    for (int r = r_lo; r <= r_hi; ++r) {
      for (int c = c_lo; c <= c_hi; ++c) {
        k.values_.push_back(std::exp(lw[static_cast<std::size_t>(r) * s.cols + c] - mx));
      }
    }
    k.finish_column(j);
  }
  return k;
}

BandedKernel BandedKernel::on_layout(const BandedKernel& layout, const LogWeight& log_weight) {
  BandedKernel k = layout;
  const Shape s = shape_of(k.grid_);
  for (std::size_t j = 0; j < k.cols_.size(); ++j) {
    const Column& c = k.cols_[j];
    double mx = kNegInf;
    std::size_t p = c.offset;
    for (int r = 0; r < c.rows; ++r) {
      for (int q = 0; q < c.cols; ++q, ++p) {
        const auto node = static_cast<std::size_t>(c.row0 + r) * s.cols + (c.col0 + q);
        k.values_[p] = log_weight(j, node);
        mx = std::max(mx, k.values_[p]);
      }
    }
    if (!std::isfinite(mx)) throw GridError("kernel column has no finite weight on its support");
    const std::size_t len = static_cast<std::size_t>(c.rows) * c.cols;
    for (std::size_t q = 0; q < len; ++q) k.values_[c.offset + q] = std::exp(k.values_[c.offset + q] - mx);
    k.finish_column(j);
  }
  return k;
}

BandedKernel BandedKernel::mix(const BandedKernel& a, const BandedKernel& b, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidParameter("mixing weight must lie in [0, 1]");
  if (!(a.grid_ == b.grid_) || a.values_.size() != b.values_.size() || a.cols_.size() != b.cols_.size()) {
    throw GridError("kernels do not share a layout");
  }
  BandedKernel k = a;
  if (w == 0.0) return k;
  kernels::scale(1.0 - w, k.values_);
  kernels::axpy(w, b.values_, k.values_);
  for (std::size_t j = 0; j < k.cols_.size(); ++j) k.finish_column(j);
  return k;
}

BandedKernel BandedKernel::from_dense_columns(const Grid& grid,
                                              const std::function<void(std::size_t, std::vector<double>&)>& fill) {
  BandedKernel k;
  k.grid_ = grid;
  const Shape s = shape_of(grid);
  const std::size_t n = grid.size();
  k.cols_.resize(n);
  std::vector<double> dense(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(dense.begin(), dense.end(), 0.0);
    fill(j, dense);
    int r_lo = s.rows, r_hi = -1, c_lo = s.cols, c_hi = -1;
    for (int r = 0; r < s.rows; ++r) {
      for (int c = 0; c < s.cols; ++c) {
        const double v = dense[static_cast<std::size_t>(r) * s.cols + c];
        if (!(v >= 0.0) || !std::isfinite(v)) throw GridError("kernel column values must be finite and nonnegative");
        if (v > 0.0) {
          r_lo = std::min(r_lo, r);
          r_hi = std::max(r_hi, r);
          c_lo = std::min(c_lo, c);
          c_hi = std::max(c_hi, c);
        }
      }
    }
    if (r_hi < 0) throw GridError("kernel column has no mass on the grid");
    Column& col = k.cols_[j];
    col.offset = k.values_.size();
    col.row0 = r_lo;
    col.rows = r_hi - r_lo + 1;
    col.col0 = c_lo;
    col.cols = c_hi - c_lo + 1;
    for (int r = r_lo; r <= r_hi; ++r) {
      for (int c = c_lo; c <= c_hi; ++c) k.values_.push_back(dense[static_cast<std::size_t>(r) * s.cols + c]);
    }
    k.finish_column(j);
  }
  return k;
}

std::vector<double> BandedKernel::column(std::size_t j) const {
  const Column& c = cols_.at(j);
  const Shape s = shape_of(grid_);
  std::vector<double> dense(grid_.size(), 0.0);
  std::size_t p = c.offset;
  for (int r = 0; r < c.rows; ++r) {
    for (int q = 0; q < c.cols; ++q) dense[static_cast<std::size_t>(c.row0 + r) * s.cols + c.col0 + q] = values_[p++];
  }
  return dense;
}

GridDensity BandedKernel::apply(const GridDensity& rho, ChannelStats* stats) const {
  if (!(rho.grid() == grid_)) throw GridError("density and kernel live on different grids");
  const Shape s = shape_of(grid_);
  const double dv = grid_.cell_volume();
  const auto in = rho.values();
  std::vector<double> out(grid_.size(), 0.0);
  double escaped = 0.0;
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    if (in[j] == 0.0) continue;
    const double w = in[j] * dv;
    const Column& c = cols_[j];
    escaped += w * c.edge_mass;
    for (int r = 0; r < c.rows; ++r) {
      const double* src = values_.data() + c.offset + static_cast<std::size_t>(r) * c.cols;
      double* dst = out.data() + static_cast<std::size_t>(c.row0 + r) * s.cols + c.col0;
      kernels::axpy(w, std::span<const double>(src, c.cols), std::span<double>(dst, c.cols));
    }
  }
  if (escaped > kTailMassTolerance) {
    throw GridError("conditional tail mass escapes the grid (" + std::to_string(escaped) + ")");
  }
  const double mass_in = rho.mass();
  GridDensity result(grid_, std::move(out));
  const double mass_out = result.mass();
  result.normalize();
  if (stats) {
    stats->drift = std::abs(mass_out / mass_in - 1.0);
    stats->escaped_mass = escaped;
  }
  return result;
}

std::vector<double> columnwise_chi_sq(const BandedKernel& a, const BandedKernel& b) {
  if (!(a.grid_ == b.grid_) || a.values_.size() != b.values_.size()) throw GridError("kernels do not share a layout");
  const double dv = a.grid_.cell_volume();
  std::vector<double> out(a.cols_.size());
  std::vector<double> terms;
  for (std::size_t j = 0; j < a.cols_.size(); ++j) {
    const auto& c = a.cols_[j];
    const std::size_t len = static_cast<std::size_t>(c.rows) * c.cols;
    terms.assign(len, 0.0);
    bool infinite = false;
    for (std::size_t q = 0; q < len; ++q) {
      const double p = a.values_[c.offset + q], r = b.values_[c.offset + q];
      if (r == 0.0) {
        if (p != 0.0) infinite = true;
        continue;
      }
      terms[q] = (p - r) * (p - r) / r;
    }
    out[j] = infinite ? kInfiniteDivergence : kernels::sum(terms) * dv;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Channels

namespace {

std::vector<double> gaussian_taps(double h, double dx, int n) {
  const int m = static_cast<int>(std::floor(std::sqrt(2.0 * kKernelCutoff * h) / dx));
  if (m >= n) throw GridError("gaussian kernel is wider than the grid");
  std::vector<double> taps(2 * m + 1);
  for (int i = -m; i <= m; ++i) taps[i + m] = std::exp(-0.5 * (i * dx) * (i * dx) / h);
  const double norm = kernels::sum(taps) * dx;
  kernels::scale(1.0 / norm, taps);
  return taps;
}

// Convolution along contiguous rows of length n.
void convolve_rows(const std::vector<double>& in, std::vector<double>& out, int rows, int n,
                   const std::vector<double>& taps, double dx) {
  const int m = static_cast<int>(taps.size() / 2);
  for (int r = 0; r < rows; ++r) {
    const double* src = in.data() + static_cast<std::size_t>(r) * n;
    double* dst = out.data() + static_cast<std::size_t>(r) * n;
    for (int i = 0; i < n; ++i) {
      const int lo = std::max(0, i - m), hi = std::min(n - 1, i + m);
      dst[i] = dx * kernels::dot(std::span<const double>(src + lo, hi - lo + 1),
                                 std::span<const double>(taps.data() + (lo - i + m), hi - lo + 1));
    }
  }
}

// Convolution along axis 0 of a rows x n array.
void convolve_columns(const std::vector<double>& in, std::vector<double>& out, int rows, int n,
                      const std::vector<double>& taps, double dx) {
  const int m = static_cast<int>(taps.size() / 2);
  std::fill(out.begin(), out.end(), 0.0);
  for (int r = 0; r < rows; ++r) {
    std::span<double> dst(out.data() + static_cast<std::size_t>(r) * n, n);
    const int lo = std::max(0, r - m), hi = std::min(rows - 1, r + m);
    for (int s = lo; s <= hi; ++s) {
      kernels::axpy(dx * taps[s - r + m], std::span<const double>(in.data() + static_cast<std::size_t>(s) * n, n), dst);
    }
  }
}

}  // namespace

GridDensity gaussian_channel(const GridDensity& rho, double h, ChannelStats* stats) {
  if (!(h > 0.0)) throw PreconditionError("gaussian channel variance must be positive");
  const Grid& g = rho.grid();
  const Shape s = shape_of(g);
  std::vector<double> cur(rho.values().begin(), rho.values().end());
  std::vector<double> next(cur.size());
  for (int k = g.dim() - 1; k >= 0; --k) {
    const double dx = g.axis(k).spacing();
    const auto taps = gaussian_taps(h, dx, g.axis(k).n);
    if (taps.size() == 1) continue;  // narrower than one cell: identity
    if (k == g.dim() - 1) {
      convolve_rows(cur, next, s.rows, s.cols, taps, dx);
    } else {
      convolve_columns(cur, next, s.rows, s.cols, taps, dx);
    }
    cur.swap(next);
  }
  const double mass_in = rho.mass();
  GridDensity out(g, std::move(cur));
  const double drift = std::abs(out.mass() / mass_in - 1.0);
  if (drift > kMassDriftTolerance) {
    throw GridError("forward step loses mass off the grid (relative drift " + std::to_string(drift) + ")");
  }
  out.normalize();
  if (stats) *stats = ChannelStats{drift, 0.0};
  return out;
}

BandedKernel rgo_kernel(const Grid& grid, const Potential& potential, double h) {
  if (!(h > 0.0)) throw PreconditionError("RGO step size must be positive");
  const auto f = potential_on_grid(grid, potential);
  const auto xs = node_coordinates(grid);
  const int d = grid.dim();
  const double inv2h = 0.5 / h;
  return BandedKernel::build(grid, [&](std::size_t j, std::size_t i) {
    double d2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = xs[i * d + k] - xs[j * d + k];
      d2 += diff * diff;
    }
    return -f[i] - d2 * inv2h;
  });
}

GridDensity rgo_channel(const GridDensity& rho_y, const Potential& potential, double h, ChannelStats* stats) {
  return rgo_kernel(rho_y.grid(), potential, h).apply(rho_y, stats);
}

GridDensity rgo_conditional_density(const Grid& grid, const Potential& potential, double h, const Vector& y) {
  if (!(h > 0.0)) throw PreconditionError("RGO step size must be positive");
  if (y.size() != grid.dim()) throw DimensionMismatch("conditioning point does not match grid dimension");
  return GridDensity::from_log_density(
      grid, [&](const Vector& x) { return -potential.value(x) - 0.5 * (x - y).squaredNorm() / h; });
}

double stationarity_error(const Grid& grid, const Potential& potential, double h) {
  const auto pi = GridDensity::target(grid, potential);
  const auto back = rgo_kernel(grid, potential, h).apply(gaussian_channel(pi, h));
  double err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(pi[i] - back[i]));
  return err;
}

// ---------------------------------------------------------------------------
// Chains

double total_fi_bound(double kl0, double h, double smoothness) {
  return kl0 / (h * (1.0 - 0.5 * smoothness * h));
}

double averaged_fi_bound(double kl0, double h, double smoothness, int steps) {
  return total_fi_bound(kl0, h, smoothness) / steps;
}

namespace {

using Channel = std::function<GridDensity(const GridDensity&, ChannelStats&)>;

void check_chain_args(const GridDensity& rho0, const Potential& potential, double h, int steps) {
  if (potential.dim() != rho0.grid().dim()) throw DimensionMismatch("initial density and target dimensions differ");
  if (!(h > 0.0) || !(h * potential.smoothness() < 1.0)) {
    throw PreconditionError("proximal chain requires 0 < h < 1/L");
  }
  if (steps < 1) throw InvalidParameter("chain needs at least one step");
}

ChannelTrace run_chain(const GridDensity& rho0, const GridDensity& pi_x, const GridDensity* pi_y,
                       const Channel* forward, const Channel& backward, int steps, double h, double smoothness) {
  ChannelTrace t;
  t.h = h;
  t.smoothness = smoothness;
  t.steps = steps;
  t.x.push_back(divergence_report(rho0, pi_x));
  t.cumulative_fi.push_back(0.0);
  std::vector<double> acc(rho0.grid().size(), 0.0);
  GridDensity rho = rho0;
  for (int k = 0; k < steps; ++k) {
    ChannelStats s;
    if (forward) {
      GridDensity ry = (*forward)(rho, s);
      t.max_drift = std::max(t.max_drift, s.drift);
      t.y.push_back(divergence_report(ry, *pi_y));
      t.forward_kl_drop.push_back(t.x.back().kl - t.y.back().kl);
      rho = backward(ry, s);
    } else {
      rho = backward(rho, s);
    }
    t.max_drift = std::max(t.max_drift, s.drift);
    t.x.push_back(divergence_report(rho, pi_x));
    if (forward) t.backward_kl_drop.push_back(t.y.back().kl - t.x.back().kl);
    t.cumulative_fi.push_back(t.cumulative_fi.back() + t.x.back().fi);
    kernels::axpy(1.0, rho.values(), acc);
  }
  kernels::scale(1.0 / steps, acc);
  t.averaged_x = GridDensity(rho0.grid(), std::move(acc));
  t.averaged_x.normalize();
  t.averaged = divergence_report(t.averaged_x, pi_x);
  t.final_x = std::move(rho);
  return t;
}

}  // namespace

ChannelTrace run_ideal_chain(const GridDensity& rho0, const Potential& potential, double h, int steps) {
  check_chain_args(rho0, potential, h, steps);
  const Grid& g = rho0.grid();
  const auto pi_x = GridDensity::target(g, potential);
  const auto pi_y = gaussian_channel(pi_x, h);
  const auto rk = rgo_kernel(g, potential, h);
  const Channel fwd = [h](const GridDensity& r, ChannelStats& s) { return gaussian_channel(r, h, &s); };
  const Channel bwd = [&rk](const GridDensity& r, ChannelStats& s) { return rk.apply(r, &s); };
  return run_chain(rho0, pi_x, &pi_y, &fwd, bwd, steps, h, potential.smoothness());
}

ChannelTrace run_perturbed_chain(const GridDensity& rho0, const Potential& potential, double h, int steps,
                                 double eps_mix) {
  check_chain_args(rho0, potential, h, steps);
  if (!(eps_mix >= 0.0 && eps_mix <= 1.0)) throw InvalidParameter("eps_mix must lie in [0, 1]");
  const Grid& g = rho0.grid();
  const auto pi_x = GridDensity::target(g, potential);
  const auto pi_y = gaussian_channel(pi_x, h);
  const auto rk = rgo_kernel(g, potential, h);
  BandedKernel used = rk;
  double worst = 0.0;
  if (eps_mix > 0.0) {
    const auto xs = node_coordinates(g);
    const int d = g.dim();
    std::vector<double> modes(xs.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Vector m = prox(potential, h, g.node(j));
      for (int k = 0; k < d; ++k) modes[j * d + k] = m(k);
    }
    const auto wide = BandedKernel::on_layout(rk, [&](std::size_t j, std::size_t i) {
      double d2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = xs[i * d + k] - modes[j * d + k];
        d2 += diff * diff;
      }
      return -0.5 * d2 / h;
    });
    used = BandedKernel::mix(rk, wide, eps_mix);
    for (double c : columnwise_chi_sq(used, rk)) worst = std::max(worst, c);
  }
  const Channel fwd = [h](const GridDensity& r, ChannelStats& s) { return gaussian_channel(r, h, &s); };
  const Channel bwd = [&used](const GridDensity& r, ChannelStats& s) { return used.apply(r, &s); };
  auto t = run_chain(rho0, pi_x, &pi_y, &fwd, bwd, steps, h, potential.smoothness());
  t.eps_mix = eps_mix;
  t.eps_chi_sq_sq = worst;
  return t;
}

std::vector<GaussianForm> gaussian_ideal_laws(const GaussianForm& target, const GaussianForm& rho0, double h,
                                              int steps) {
  if (!(h > 0.0) || steps < 0) throw InvalidParameter("invalid Gaussian recursion arguments");
  std::vector<GaussianForm> laws{rho0};
  // Y ~ N(mu, s + h); X | Y ~ N((Y/h + m/v)/P, 1/P) with P = 1/h + 1/v.
  const double p = 1.0 / h + 1.0 / target.variance;
  for (int k = 0; k < steps; ++k) {
    const auto& cur = laws.back();
    GaussianForm next;
    next.mean = (cur.mean / h + target.mean / target.variance) / p;
    next.variance = (cur.variance + h) / (h * h * p * p) + 1.0 / p;
    laws.push_back(next);
  }
  return laws;
}

std::vector<StepCheck> check_step_inequalities(const ChannelTrace& trace, double h, double smoothness) {
  std::vector<StepCheck> out;
  for (std::size_t k = 0; k < trace.y.size(); ++k) {
    const auto& xk = trace.x[k];
    const auto& yk = trace.y[k];
    const auto& xn = trace.x[k + 1];
    StepCheck c;
    c.step = static_cast<int>(k);
    c.forward = {0.5 * h * (1.0 - h * smoothness) * yk.fi, xk.kl - yk.kl};
    c.backward_fi = {xn.fi, yk.fi};
    c.backward_kl = {xn.fi, (2.0 / h) * (yk.kl - xn.kl)};
    out.push_back(c);
  }
  return out;
}

std::vector<ChiSqCheck> check_chi_sq_growth(const ChannelTrace& trace) {
  std::vector<ChiSqCheck> out;
  const double chi0 = trace.x.front().chi_sq;
  const double grow = 1.0 + trace.eps_chi_sq_sq;
  for (std::size_t k = 1; k < trace.x.size(); ++k) {
    double worst = trace.x[k].chi_sq;
    if (k < trace.y.size()) worst = std::max(worst, trace.y[k].chi_sq);
    const double envelope = std::pow(grow, static_cast<double>(k)) * (chi0 + 1.0) - 1.0;
    out.push_back({static_cast<int>(k), {worst, envelope}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Smoothed backward step

std::vector<double> mala_nodal_law(const std::vector<double>& u, const std::vector<double>& v,
                                   const std::vector<double>& dv, double eta, int steps) {
  const std::size_t n = u.size();
  std::vector<double> q(n * n);  // q[i*n + l] = proposal i -> l, rows normalised
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = u[i] - eta * dv[i];
    double mx = kNegInf;
    for (std::size_t l = 0; l < n; ++l) {
      const double z = u[l] - mean;
      q[i * n + l] = -z * z / (4.0 * eta);
      mx = std::max(mx, q[i * n + l]);
    }
    for (std::size_t l = 0; l < n; ++l) q[i * n + l] = std::exp(q[i * n + l] - mx);
    const double s = kernels::sum(std::span<const double>(q.data() + i * n, n));
    kernels::scale(1.0 / s, std::span<double>(q.data() + i * n, n));
  }
  std::vector<double> p(n * n);  // transition matrix
  for (std::size_t i = 0; i < n; ++i) {
    double moved = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      const double fwd = q[i * n + l];
      if (fwd == 0.0) {
        p[i * n + l] = 0.0;
        continue;
      }
      const double log_ratio = v[i] - v[l] + std::log(q[l * n + i]) - std::log(fwd);
      const double acc = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
      p[i * n + l] = fwd * acc;
      moved += p[i * n + l];
    }
    p[i * n + i] = std::max(0.0, 1.0 - moved);
  }
  std::vector<double> law(n, 0.0), next(n);
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(u[i]) < std::abs(u[start])) start = i;
  }
  law[start] = 1.0;
  for (int s = 0; s < steps; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (law[i] == 0.0) continue;
      kernels::axpy(law[i], std::span<const double>(p.data() + i * n, n), next);
    }
    law.swap(next);
  }
  return law;
}


BandedKernel smoothed_rgo_kernel(const Grid& grid, const Potential& potential, const SmoothedChannelConfig& config) {
  if (grid.dim() != 1 || potential.dim() != 1) throw InvalidParameter("smoothed channel is one-dimensional");
  const double L = potential.smoothness();
  if (!(L > 0.0)) throw PreconditionError("smoothed channel needs L > 0");
  if (config.u_nodes < 5 || !(config.u_half_width > 0.0)) throw InvalidParameter("invalid u-grid");
  if (!config.exact_inner && (!(config.mala_step > 0.0) || config.mala_steps < 1)) {
    throw InvalidParameter("invalid MALA inner configuration");
  }
  const double h = 0.5 / L;
  const double root = std::sqrt(L);
  const Axis ua{-config.u_half_width, config.u_half_width, config.u_nodes};
  std::vector<double> u(ua.n);
  for (int i = 0; i < ua.n; ++i) u[i] = ua.node(i);
  const Axis& xa = grid.axis(0);

  return BandedKernel::from_dense_columns(grid, [&](std::size_t j, std::vector<double>& col) {
    const double y = xa.node(static_cast<int>(j));
    const double m = prox(potential, h, Vector::Constant(1, y))(0);
    std::vector<double> v(u.size()), dv(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = m + u[i] / root;
      v[i] = potential.value1(x) + L * (x - y) * (x - y);
      dv[i] = (potential.derivative1(x) + 2.0 * L * (x - y)) / root;
    }
    std::vector<double> law;
    if (config.exact_inner) {
      const double vmin = *std::min_element(v.begin(), v.end());
      law.resize(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) law[i] = std::exp(vmin - v[i]);
    } else {
      law = mala_nodal_law(u, v, dv, config.mala_step, config.mala_steps);
    }
    // Log-linear interpolation of the nodal law onto x = m + u / sqrt(L).
    const double du = ua.spacing();
    for (int i = 0; i < xa.n; ++i) {
      const double uu = root * (xa.node(i) - m);
      if (uu < ua.min || uu > ua.max) continue;
      const double pos = (uu - ua.min) / du;
      const auto a = std::min(static_cast<std::size_t>(pos), u.size() - 2);
      const double frac = pos - static_cast<double>(a);
      const double la = law[a], lb = law[a + 1];
      if (la <= 0.0 || lb <= 0.0) {
        col[i] = (1.0 - frac) * la + frac * lb;
      } else {
        col[i] = std::exp((1.0 - frac) * std::log(la) + frac * std::log(lb));
      }
    }
  });
}

ChannelTrace run_smoothed_chain(const GridDensity& rho0, const Potential& potential, int steps,
                                const SmoothedChannelConfig& config) {
  const double h = 0.5 / potential.smoothness();
  check_chain_args(rho0, potential, h, steps);
  if (!(config.smoothing_variance >= 0.0)) throw InvalidParameter("smoothing variance must be nonnegative");
  const Grid& g = rho0.grid();
  const auto pi_x = GridDensity::target(g, potential);
  const auto pi_y = gaussian_channel(pi_x, h);
  const auto sk = smoothed_rgo_kernel(g, potential, config);
  const double t = config.smoothing_variance;
  const Channel fwd = [h](const GridDensity& r, ChannelStats& s) { return gaussian_channel(r, h, &s); };
  const Channel bwd = [&sk, t](const GridDensity& r, ChannelStats& s) {
    GridDensity out = sk.apply(r, &s);
    if (t > 0.0) {
      ChannelStats s2;
      out = gaussian_channel(out, t, &s2);
      s.drift = std::max(s.drift, s2.drift);
    }
    return out;
  };
  return run_chain(rho0, pi_x, &pi_y, &fwd, bwd, steps, h, potential.smoothness());
}

BandedKernel ula_kernel(const Grid& grid, const Potential& potential, double step) {
  if (!(step > 0.0)) throw InvalidParameter("ULA step must be positive");
  if (potential.dim() != grid.dim()) throw DimensionMismatch("potential dimension does not match grid dimension");
  const auto xs = node_coordinates(grid);
  const int d = grid.dim();
  std::vector<double> drift(xs.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Vector g = potential.gradient(grid.node(j));
    for (int k = 0; k < d; ++k) drift[j * d + k] = xs[j * d + k] - step * g(k);
  }
  return BandedKernel::build(grid, [&](std::size_t j, std::size_t i) {
    double d2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = xs[i * d + k] - drift[j * d + k];
      d2 += diff * diff;
    }
    return -d2 / (4.0 * step);
  });
}

ChannelTrace run_ula_law(const GridDensity& rho0, const Potential& potential, double step, int steps) {
  if (steps < 1) throw InvalidParameter("chain needs at least one step");
  if (!(step > 0.0) || !(step * potential.smoothness() < 1.0)) throw PreconditionError("ULA requires 0 < step < 1/L");
  const Grid& g = rho0.grid();
  const auto pi_x = GridDensity::target(g, potential);
  const auto uk = ula_kernel(g, potential, step);
  const Channel bwd = [&uk](const GridDensity& r, ChannelStats& s) { return uk.apply(r, &s); };
  return run_chain(rho0, pi_x, nullptr, nullptr, bwd, steps, step, potential.smoothness());
}

// ---------------------------------------------------------------------------
// Epsilon sweep

EpsilonSweep sweep_averaged_fi(const GridDensity& rho0, const Potential& potential, double h,
                               const std::vector<double>& epsilons, long max_steps) {
  check_chain_args(rho0, potential, h, 1);
  if (max_steps < 1) throw InvalidParameter("sweep needs max_steps >= 1");
  const Grid& g = rho0.grid();
  const auto pi_x = GridDensity::target(g, potential);
  const auto rk = rgo_kernel(g, potential, h);
  EpsilonSweep out;
  out.epsilons = epsilons;
  out.first_k.assign(epsilons.size(), -1);
  out.averaged_fi_at_k.assign(epsilons.size(), 0.0);
  out.kl0 = kl_grid(rho0, pi_x);
  std::vector<double> acc(g.size(), 0.0), avg(g.size());
  GridDensity rho = rho0;
  std::size_t open = epsilons.size();
  for (long k = 1; k <= max_steps && open > 0; ++k) {
    rho = rk.apply(gaussian_channel(rho, h));
    kernels::axpy(1.0, rho.values(), acc);
    std::copy(acc.begin(), acc.end(), avg.begin());
    kernels::scale(1.0 / static_cast<double>(k), avg);
    GridDensity bar(g, avg);
    bar.normalize();
    const double fi = fi_grid(bar, pi_x);
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      if (out.first_k[e] < 0 && fi <= epsilons[e] * epsilons[e]) {
        out.first_k[e] = k;
        out.averaged_fi_at_k[e] = fi;
        --open;
      }
    }
  }
  return out;
}

double log_log_slope(const std::vector<double>& epsilons, const std::vector<long>& first_k) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < epsilons.size() && i < first_k.size(); ++i) {
    if (first_k[i] > 0 && epsilons[i] > 0.0) {
      pts.emplace_back(std::log(1.0 / epsilons[i]), std::log(static_cast<double>(first_k[i])));
    }
  }
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Grid selection and serialisation

namespace {

// Walk outward from `centre` along coordinate `axis` until f has risen 60 nats
// above the smallest value seen, i.e. the density is below e^-60 of its peak.
double level_extent(const Potential& p, const Vector& centre, int axis, double direction) {
  const double scale = 1.0 / std::sqrt(std::max(p.smoothness(), 1e-6));
  const double dstep = 0.01 * scale;
  Vector x = centre;
  double lowest = p.value(x);
  for (int i = 1; i <= 200000; ++i) {
    x(axis) = centre(axis) + direction * i * dstep;
    const double fx = p.value(x);
    lowest = std::min(lowest, fx);
    if (fx - lowest >= 60.0) return x(axis);
  }
  throw GridError("target does not decay along a grid axis");
}

}  // namespace

Grid choose_grid(const Potential& potential, const Vector& init_mean, double init_variance, double h, int nodes) {
  const int d = potential.dim();
  if (d < 1 || d > 2) throw GridError("grids are one- or two-dimensional");
  if (init_mean.size() != d) throw DimensionMismatch("initial mean does not match target dimension");
  const Vector centre = potential.mode_hint().value_or(Vector::Zero(d));
  const double margin = 10.0 * std::sqrt(std::max(h, 0.0));
  const double spread = 10.0 * std::sqrt(init_variance);
  std::vector<Axis> axes;
  for (int k = 0; k < d; ++k) {
    const double lo = std::min(level_extent(potential, centre, k, -1.0), init_mean(k) - spread) - margin;
    const double hi = std::max(level_extent(potential, centre, k, 1.0), init_mean(k) + spread) + margin;
    axes.push_back({lo, hi, nodes});
  }
  return Grid(axes);
}

std::string trace_csv(const ChannelTrace& trace, const std::vector<StepCheck>& checks) {
  std::ostringstream os;
  os.precision(17);
  os << "k,kl_x,fi_x,kl_y,fi_y,chi_sq_x,renyi2_x,slack_forward,slack_backward_fi,slack_backward_kl\n";
  for (std::size_t k = 0; k < trace.x.size(); ++k) {
    const auto& x = trace.x[k];
    os << k << ',' << x.kl << ',' << x.fi << ',';
    if (k < trace.y.size()) {
      os << trace.y[k].kl << ',' << trace.y[k].fi;
    } else {
      os << ',';
    }
    const auto r2 = x.renyi.find(2);
    os << ',' << x.chi_sq << ',' << (r2 == x.renyi.end() ? 0.0 : r2->second);
    if (k < checks.size()) {
      os << ',' << checks[k].forward.slack() << ',' << checks[k].backward_fi.slack() << ','
         << checks[k].backward_kl.slack();
    } else {
      os << ",,,";
    }
    os << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const ChannelTrace& trace) {
  nlohmann::json j;
  j["h"] = trace.h;
  j["L"] = trace.smoothness;
  j["K"] = trace.steps;
  j["x"] = nlohmann::json::array();
  for (const auto& r : trace.x) j["x"].push_back(to_json(r));
  j["y"] = nlohmann::json::array();
  for (const auto& r : trace.y) j["y"].push_back(to_json(r));
  j["cumulative_fi"] = trace.cumulative_fi;
  j["averaged"] = to_json(trace.averaged);
  j["max_drift"] = trace.max_drift;
  if (trace.eps_mix > 0.0) {
    j["eps_mix"] = trace.eps_mix;
    j["eps_chi_sq_sq"] = trace.eps_chi_sq_sq;
  }
  return j;
}

}  // namespace proxfi
