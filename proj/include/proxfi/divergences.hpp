#pragma once

// KL, chi-square, Rényi, total variation and relative Fisher information
// between densities: by quadrature on grids, in closed form for isotropic
// Gaussians. An infinite divergence is reported as +inf, never thrown.

#include <limits>
#include <map>
#include "json.hpp"

#include "proxfi/grid.hpp"

namespace proxfi {

inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();
inline bool is_infinite(double d) { return d == kInfiniteDivergence; }

// Nodes where a density falls below this are treated as empty by the FI
// stencil; their mass is booked in the quadrature error estimate.
inline constexpr double kDensityFloor = 1e-300;

struct DivergenceReport {
  double kl = 0.0;
  double fi = 0.0;
  double chi_sq = 0.0;
  std::map<int, double> renyi;  // order -> value
  double tv = 0.0;
  double quadrature_error_estimate = 0.0;
};

double kl_grid(const GridDensity& rho, const GridDensity& pi);
double chi_sq_grid(const GridDensity& rho, const GridDensity& pi);
// q > 0, q != 1.
double renyi_grid(const GridDensity& rho, const GridDensity& pi, double q);
double tv_grid(const GridDensity& rho, const GridDensity& pi);

struct FisherResult {
  double value = 0.0;
  double excluded_mass = 0.0;  // rho-mass at nodes the stencil could not use
};
// Fourth-order centred differences of log rho and log pi taken separately.
FisherResult fi_grid_detailed(const GridDensity& rho, const GridDensity& pi);
double fi_grid(const GridDensity& rho, const GridDensity& pi);

DivergenceReport divergence_report(const GridDensity& rho, const GridDensity& pi,
                                   std::initializer_list<int> renyi_orders = {2, 3});

// Flat object: kl, fi, chi_sq, renyi_<q>..., tv, quad_err. Infinite values are
// written as the string "inf".
nlohmann::json to_json(const DivergenceReport& r);
DivergenceReport divergence_report_from_json(const nlohmann::json& j);

enum class DivergenceId { kl, fi, chi_sq, renyi };

// Closed forms for rho = N(m1, s1 I), pi = N(m2, s2 I) in R^d. Rényi of order
// q > 1 is infinite when q*s2 + (1-q)*s1 <= 0; chi-square is exp(R_2) - 1.
double gaussian_closed_form(const GaussianForm& rho, const GaussianForm& pi, DivergenceId which, double q = 2.0);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const { return rhs - lhs; }
  bool holds(double tolerance) const { return slack() >= -tolerance; }
};

// lhs = KL(mu|pi) - KL(nu|pi); rhs = KL(mu|nu) + (2 + R_2(nu|pi)) sqrt(chi2(mu|nu)).
InequalityCheck check_kl_decomposition(const GridDensity& mu, const GridDensity& nu, const GridDensity& pi);
InequalityCheck check_kl_decomposition(const GaussianForm& mu, const GaussianForm& nu, const GaussianForm& pi);

// actual = R_q(pi * N(0, tI) | pi) by quadrature; bound = d/(2(q-1)) log(1/(1 - L q t)).
// Requires 0 <= t < 1/(L q) and integer q >= 2.
InequalityCheck check_renyi_after_heat(const GridDensity& pi, double smoothness, double t, int q);

}  // namespace proxfi
