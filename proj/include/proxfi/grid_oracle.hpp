#pragma once

// Deterministic evolution of the law of the proximal sampler on a grid. The
// forward step is a Toeplitz convolution with a discretely normalised Gaussian
// kernel; the backward step applies a banded column-stochastic matrix whose
// column y is the restricted Gaussian oracle exp(-f(x) - |x-y|^2/(2h)) / Z(y),
// with Z(y) by quadrature. Columns are stored on the bounding box of the set
// where the log weight is within kKernelCutoff of its maximum.

#include <functional>
#include <vector>

#include "json.hpp"
#include "proxfi/divergences.hpp"
#include "proxfi/grid.hpp"
#include "proxfi/targets.hpp"

namespace proxfi {

inline constexpr double kKernelCutoff = 50.0;     // log-weight window kept per column
inline constexpr double kMassDriftTolerance = 1e-9;
inline constexpr double kTailMassTolerance = 1e-12;
inline constexpr double kInequalityTolerance = 1e-6;

struct ChannelStats {
  double drift = 0.0;          // |mass_out / mass_in - 1| before renormalisation
  double escaped_mass = 0.0;   // mass routed through columns that touch the boundary
};

class BandedKernel {
 public:
  using LogWeight = std::function<double(std::size_t column, std::size_t node)>;

  BandedKernel() = default;

  // Evaluates log_weight on the whole grid for each column, keeps the bounding
  // box of {node : w >= max - cutoff} and normalises to unit mass.
  static BandedKernel build(const Grid& grid, const LogWeight& log_weight, double cutoff = kKernelCutoff);
  // Same boxes as `layout`, new weights, normalised on the box.
  static BandedKernel on_layout(const BandedKernel& layout, const LogWeight& log_weight);
  // (1 - w) * a + w * b; both must share a layout.
  static BandedKernel mix(const BandedKernel& a, const BandedKernel& b, double w);
  // Column j is given directly as a dense nonnegative vector over the grid.
  static BandedKernel from_dense_columns(const Grid& grid,
                                         const std::function<void(std::size_t, std::vector<double>&)>& fill);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t columns() const noexcept { return cols_.size(); }
  std::size_t stored_values() const noexcept { return values_.size(); }

  // Dense copy of column j (density over the grid, unit mass).
  std::vector<double> column(std::size_t j) const;
  // Column mass sitting on boundary nodes.
  double edge_mass(std::size_t j) const { return cols_.at(j).edge_mass; }

  // out(x) = sum_y K(x | y) rho(y) dV, renormalised. Throws GridError when the
  // mass carried by boundary-touching columns exceeds kTailMassTolerance.
  GridDensity apply(const GridDensity& rho, ChannelStats* stats = nullptr) const;

  // chi^2(column_j(a) | column_j(b)) for each column; layouts must match.
  friend std::vector<double> columnwise_chi_sq(const BandedKernel& a, const BandedKernel& b);

 private:
  struct Column {
    std::size_t offset = 0;
    int row0 = 0, rows = 1;  // box along axis 0 (2D only)
    int col0 = 0, cols = 0;  // box along the fastest axis
    double edge_mass = 0.0;
  };
  void finish_column(std::size_t j);

  Grid grid_;
  std::vector<Column> cols_;
  std::vector<double> values_;
};

// rho * N(0, h I) on the grid. Throws GridError when the truncated kernel is
// wider than the grid or more than kMassDriftTolerance of the mass leaves it.
GridDensity gaussian_channel(const GridDensity& rho, double h, ChannelStats* stats = nullptr);

// log R_y(x) up to a constant, i.e. -f(x) - |x - y|^2 / (2h), for all grid pairs.
BandedKernel rgo_kernel(const Grid& grid, const Potential& potential, double h);

// One backward step. Any h > 0 is accepted as long as every conditional that
// carries mass stays on the grid.
GridDensity rgo_channel(const GridDensity& rho_y, const Potential& potential, double h,
                        ChannelStats* stats = nullptr);

// R_y as a normalised density on the grid (quadrature reference for samplers).
GridDensity rgo_conditional_density(const Grid& grid, const Potential& potential, double h, const Vector& y);

// sup_x |pi(x) - (pi Q^h R^h)(x)|.
double stationarity_error(const Grid& grid, const Potential& potential, double h);

struct ChannelTrace {
  double h = 0.0;
  double smoothness = 0.0;
  int steps = 0;
  // x[k] compares rho_k^X with pi^X for k = 0..K; y[k] compares rho_k^X Q^h
  // with pi^Y for k = 0..K-1, so step k maps x[k] -> y[k] -> x[k+1].
  std::vector<DivergenceReport> x;
  std::vector<DivergenceReport> y;
  std::vector<double> forward_kl_drop;
  std::vector<double> backward_kl_drop;
  std::vector<double> cumulative_fi;  // sum_{j=1}^k FI(rho_j^X), k = 0..K
  GridDensity averaged_x;             // (1/K) sum_{k=1}^K rho_k^X
  DivergenceReport averaged;
  GridDensity final_x;
  double max_drift = 0.0;
  // Perturbed runs only.
  double eps_mix = 0.0;
  double eps_chi_sq_sq = 0.0;  // max_y chi^2(perturbed R_y | R_y)

  double kl0() const { return x.front().kl; }
  double total_fi() const { return cumulative_fi.back(); }
};

// Upper bounds for the ideal chain: KL0 / (h (1 - L h / 2)) and that over K.
double total_fi_bound(double kl0, double h, double smoothness);
double averaged_fi_bound(double kl0, double h, double smoothness, int steps);

// Requires 0 < h < 1/L and K >= 1.
ChannelTrace run_ideal_chain(const GridDensity& rho0, const Potential& potential, double h, int steps);

// Backward step uses (1 - eps_mix) R_y + eps_mix W_y with W_y = N(prox_{hf}(y), h I)
// restricted to the stored support of R_y.
ChannelTrace run_perturbed_chain(const GridDensity& rho0, const Potential& potential, double h, int steps,
                                 double eps_mix);

// Closed-form laws of the ideal chain for pi = N(m, v I) started at N(mu, s I):
// entry k is the law of X_k, k = 0..K.
std::vector<GaussianForm> gaussian_ideal_laws(const GaussianForm& target, const GaussianForm& rho0, double h,
                                              int steps);

struct StepCheck {
  int step = 0;                 // k: x[k] -> y[k] -> x[k+1]
  InequalityCheck forward;      // h(1 - hL)/2 FI(y_k) <= KL(x_k) - KL(y_k)
  InequalityCheck backward_fi;  // FI(x_{k+1}) <= FI(y_k)
  InequalityCheck backward_kl;  // FI(x_{k+1}) <= (2/h)(KL(y_k) - KL(x_{k+1}))
  bool holds(double tol = kInequalityTolerance) const {
    return forward.holds(tol) && backward_fi.holds(tol) && backward_kl.holds(tol);
  }
};
std::vector<StepCheck> check_step_inequalities(const ChannelTrace& trace, double h, double smoothness);

// max{chi2(x_k), chi2(y_k)} <= (1 + e)^k (chi2_0 + 1) - 1 with e = eps_chi_sq_sq,
// one entry per k = 1..K. The envelope uses the iterate pair that enters step k.
struct ChiSqCheck {
  int step = 0;
  InequalityCheck check;
};
std::vector<ChiSqCheck> check_chi_sq_growth(const ChannelTrace& trace);

// Law of the smoothed backward step with a MALA inner sampler. The inner
// chain is a Metropolis chain on a u-grid with the discretised MALA proposal,
// started at the origin; its law is pushed to x = m + u/sqrt(L) by linear
// deposition and then smoothed with N(0, t I). 1D only.
struct SmoothedChannelConfig {
  double smoothing_variance = 0.0;  // t
  double mala_step = 0.1;
  int mala_steps = 100;
  bool exact_inner = false;  // use nu itself instead of the MALA law
  int u_nodes = 193;
  double u_half_width = 8.0;
};
// Law after `steps` Metropolis steps on the uniform nodes u, started at the
// node nearest the origin. v and dv hold the potential and its derivative at
// the nodes; the MALA proposal is restricted to the nodes and renormalised.
std::vector<double> mala_nodal_law(const std::vector<double>& u, const std::vector<double>& v,
                                   const std::vector<double>& dv, double step, int steps);
BandedKernel smoothed_rgo_kernel(const Grid& grid, const Potential& potential, const SmoothedChannelConfig& config);
// h = 1/(2L).
ChannelTrace run_smoothed_chain(const GridDensity& rho0, const Potential& potential, int steps,
                                const SmoothedChannelConfig& config);

// Law of x' = x - step grad f(x) + sqrt(2 step) xi, one kernel per step.
BandedKernel ula_kernel(const Grid& grid, const Potential& potential, double step);
// Only trace.x is filled; pi is the true target, not ULA's stationary law.
ChannelTrace run_ula_law(const GridDensity& rho0, const Potential& potential, double step, int steps);

// First K with FI(rho_bar_K | pi) <= eps^2, for each eps (any order), capped at
// max_steps (reported as -1 when not reached).
struct EpsilonSweep {
  std::vector<double> epsilons;
  std::vector<long> first_k;
  double kl0 = 0.0;
  std::vector<double> averaged_fi_at_k;  // FI(rho_bar_K) at each recorded K
};
EpsilonSweep sweep_averaged_fi(const GridDensity& rho0, const Potential& potential, double h,
                               const std::vector<double>& epsilons, long max_steps);

// Least-squares slope of log K against log(1/eps).
double log_log_slope(const std::vector<double>& epsilons, const std::vector<long>& first_k);

// Grid covering mode_hint +- 10 effective standard deviations, the support of
// a Gaussian initialisation N(init_mean, init_variance) (+- 10 sd) and a margin
// for the conditional at step h.
Grid choose_grid(const Potential& potential, const Vector& init_mean, double init_variance, double h, int nodes);

// CSV: k, kl_x, fi_x, kl_y, fi_y, chi_sq_x, renyi2_x, slack_forward,
// slack_backward_fi, slack_backward_kl.
std::string trace_csv(const ChannelTrace& trace, const std::vector<StepCheck>& checks);
nlohmann::json to_json(const ChannelTrace& trace);

}  // namespace proxfi
