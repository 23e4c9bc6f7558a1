#include "proxfi/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "proxfi/errors.hpp"
#include "proxfi/grid_oracle.hpp"
#include "proxfi/kernels.hpp"

namespace proxfi {

namespace {

// log sum_i exp(a_i), fixed summation order. Entries equal to -inf are skipped.
double log_sum_exp(std::span<const double> a) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : a) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  std::vector<double> e(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) e[i] = std::exp(a[i] - mx);
  return mx + std::log(kernels::sum(e));
}

}  // namespace

double kl_grid(const GridDensity& rho, const GridDensity& pi) {
  require_same_grid(rho, pi);
  const auto r = rho.values();
  const auto p = pi.values();
  std::vector<double> terms(r.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == 0.0) continue;
    if (p[i] == 0.0) return kInfiniteDivergence;
    terms[i] = r[i] * std::log(r[i] / p[i]);
  }
  return kernels::sum(terms) * rho.grid().cell_volume();
}

double chi_sq_grid(const GridDensity& rho, const GridDensity& pi) {
  require_same_grid(rho, pi);
  const auto r = rho.values();
  const auto p = pi.values();
  std::vector<double> terms(r.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (p[i] == 0.0) {
      if (r[i] != 0.0) return kInfiniteDivergence;
      continue;
    }
    const double diff = r[i] - p[i];
    terms[i] = diff * diff / p[i];
  }
  const double v = kernels::sum(terms) * rho.grid().cell_volume();
  return std::isfinite(v) ? v : kInfiniteDivergence;
}

double renyi_grid(const GridDensity& rho, const GridDensity& pi, double q) {
  require_same_grid(rho, pi);
  if (!(q > 0.0) || q == 1.0) throw InvalidParameter("Rényi order must be positive and different from 1");
  const auto r = rho.values();
  const auto p = pi.values();
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> tilted(r.size(), ninf), base(r.size(), ninf);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == 0.0) continue;
    base[i] = std::log(r[i]);
    if (p[i] == 0.0) {
      if (q > 1.0) return kInfiniteDivergence;
      continue;
    }
    // rho * (rho/pi)^(q-1); the ratio is exactly 1 where the densities coincide.
    tilted[i] = base[i] + (q - 1.0) * std::log(r[i] / p[i]);
  }
  const double v = (log_sum_exp(tilted) - log_sum_exp(base)) / (q - 1.0);
  return std::isfinite(v) ? v : kInfiniteDivergence;
}

double tv_grid(const GridDensity& rho, const GridDensity& pi) {
  require_same_grid(rho, pi);
  const auto r = rho.values();
  const auto p = pi.values();
  std::vector<double> terms(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) terms[i] = std::abs(r[i] - p[i]);
  return 0.5 * kernels::sum(terms) * rho.grid().cell_volume();
}

FisherResult fi_grid_detailed(const GridDensity& rho, const GridDensity& pi) {
  require_same_grid(rho, pi);
  const Grid& g = rho.grid();
  const auto r = rho.values();
  const auto p = pi.values();
  const std::size_t n = r.size();

  std::vector<double> log_r(n), log_p(n);
  std::vector<char> usable(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] > 0.0 && p[i] == 0.0) return {kInfiniteDivergence, 0.0};
    usable[i] = r[i] >= kDensityFloor && p[i] >= kDensityFloor;
    log_r[i] = usable[i] ? std::log(r[i]) : 0.0;
    log_p[i] = usable[i] ? std::log(p[i]) : 0.0;
  }

  std::vector<double> terms(n, 0.0), excluded(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] == 0.0) continue;
    const auto idx = g.multi_index(i);
    double sq = 0.0;
    bool ok = usable[i] != 0;
    for (int k = 0; k < g.dim() && ok; ++k) {
      const int j = idx[k];
      const int nk = g.axis(k).n;
      if (j < 2 || j + 2 >= nk) {
        ok = false;
        break;
      }
      const std::size_t s = g.stride(k);
      const std::size_t im2 = i - 2 * s, im1 = i - s, ip1 = i + s, ip2 = i + 2 * s;
      if (!usable[im2] || !usable[im1] || !usable[ip1] || !usable[ip2]) {
        ok = false;
        break;
      }
      const double inv = 1.0 / (12.0 * g.axis(k).spacing());
      // Differencing the two log densities separately, then subtracting.
      const double dr = (-log_r[ip2] + 8.0 * log_r[ip1] - 8.0 * log_r[im1] + log_r[im2]) * inv;
      const double dp = (-log_p[ip2] + 8.0 * log_p[ip1] - 8.0 * log_p[im1] + log_p[im2]) * inv;
      sq += (dr - dp) * (dr - dp);
    }
    if (ok) {
      terms[i] = r[i] * sq;
    } else {
      excluded[i] = r[i];
    }
  }
  const double dv = g.cell_volume();
  const double v = kernels::sum(terms) * dv;
  return {std::isfinite(v) ? v : kInfiniteDivergence, kernels::sum(excluded) * dv};
}

double fi_grid(const GridDensity& rho, const GridDensity& pi) { return fi_grid_detailed(rho, pi).value; }

DivergenceReport divergence_report(const GridDensity& rho, const GridDensity& pi,
                                   std::initializer_list<int> renyi_orders) {
  DivergenceReport rep;
  rep.kl = kl_grid(rho, pi);
  const auto fi = fi_grid_detailed(rho, pi);
  rep.fi = fi.value;
  rep.chi_sq = chi_sq_grid(rho, pi);
  for (int q : renyi_orders) rep.renyi[q] = renyi_grid(rho, pi, q);
  rep.tv = tv_grid(rho, pi);
  rep.quadrature_error_estimate = fi.excluded_mass + std::abs(rho.mass() - 1.0) + std::abs(pi.mass() - 1.0);
  return rep;
}

namespace {
nlohmann::json number_or_inf(double v) {
  if (is_infinite(v)) return "inf";
  return v;
}
double read_number(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return kInfiniteDivergence;
  return j.get<double>();
}
}  // namespace

nlohmann::json to_json(const DivergenceReport& r) {
  nlohmann::json j;
  j["kl"] = number_or_inf(r.kl);
  j["fi"] = number_or_inf(r.fi);
  j["chi_sq"] = number_or_inf(r.chi_sq);
  for (const auto& [q, v] : r.renyi) j["renyi_" + std::to_string(q)] = number_or_inf(v);
  j["tv"] = r.tv;
  j["quad_err"] = r.quadrature_error_estimate;
  return j;
}

DivergenceReport divergence_report_from_json(const nlohmann::json& j) {
  DivergenceReport r;
  r.kl = read_number(j.at("kl"));
  r.fi = read_number(j.at("fi"));
  r.chi_sq = read_number(j.at("chi_sq"));
  for (const auto& [key, value] : j.items()) {
    if (key.rfind("renyi_", 0) == 0) r.renyi[std::stoi(key.substr(6))] = read_number(value);
  }
  r.tv = j.at("tv").get<double>();
  r.quadrature_error_estimate = j.at("quad_err").get<double>();
  return r;
}

double gaussian_closed_form(const GaussianForm& rho, const GaussianForm& pi, DivergenceId which, double q) {
  if (rho.mean.size() != pi.mean.size()) throw DimensionMismatch("gaussians of different dimension");
  if (!(rho.variance > 0.0) || !(pi.variance > 0.0)) throw InvalidParameter("gaussian variance must be positive");
  const double d = static_cast<double>(rho.mean.size());
  const double s1 = rho.variance, s2 = pi.variance;
  const double gap = (rho.mean - pi.mean).squaredNorm();
  switch (which) {
    case DivergenceId::kl: {
      const double ratio = s1 / s2;
      return 0.5 * d * (ratio - 1.0 - std::log(ratio)) + 0.5 * gap / s2;
    }
    case DivergenceId::fi:
      return d * (s1 - s2) * (s1 - s2) / (s1 * s2 * s2) + gap / (s2 * s2);
    case DivergenceId::renyi: {
      if (!(q > 0.0) || q == 1.0) throw InvalidParameter("Rényi order must be positive and different from 1");
      const double mixed = q * s2 + (1.0 - q) * s1;
      if (!(mixed > 0.0)) return kInfiniteDivergence;
      return 0.5 * q * gap / mixed +
             0.5 * d * ((1.0 - q) * std::log(s1) + q * std::log(s2) - std::log(mixed)) / (q - 1.0);
    }
    case DivergenceId::chi_sq: {
      const double r2 = gaussian_closed_form(rho, pi, DivergenceId::renyi, 2.0);
      if (is_infinite(r2)) return kInfiniteDivergence;
      const double v = std::expm1(r2);
      return std::isfinite(v) ? v : kInfiniteDivergence;
    }
  }
  return 0.0;
}

namespace {
InequalityCheck kl_decomposition(double kl_mu_pi, double kl_nu_pi, double kl_mu_nu, double r2_nu_pi,
                                 double chi_mu_nu) {
  InequalityCheck c;
  c.lhs = kl_mu_pi - kl_nu_pi;
  if (is_infinite(chi_mu_nu) || is_infinite(r2_nu_pi) || is_infinite(kl_mu_nu)) {
    c.rhs = kInfiniteDivergence;
  } else {
    c.rhs = kl_mu_nu + (2.0 + r2_nu_pi) * std::sqrt(chi_mu_nu);
  }
  return c;
}
}  // namespace

InequalityCheck check_kl_decomposition(const GridDensity& mu, const GridDensity& nu, const GridDensity& pi) {
  require_same_grid(mu, nu);
  require_same_grid(nu, pi);
  const auto m = mu.values();
  const auto n = nu.values();
  const auto p = pi.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if ((m[i] > 0.0 && n[i] == 0.0) || (n[i] > 0.0 && p[i] == 0.0)) {
      throw GridError("absolute continuity mu << nu << pi fails on the grid");
    }
  }
  return kl_decomposition(kl_grid(mu, pi), kl_grid(nu, pi), kl_grid(mu, nu), renyi_grid(nu, pi, 2.0),
                          chi_sq_grid(mu, nu));
}

InequalityCheck check_kl_decomposition(const GaussianForm& mu, const GaussianForm& nu, const GaussianForm& pi) {
  using enum DivergenceId;
  return kl_decomposition(gaussian_closed_form(mu, pi, kl), gaussian_closed_form(nu, pi, kl),
                          gaussian_closed_form(mu, nu, kl), gaussian_closed_form(nu, pi, renyi, 2.0),
                          gaussian_closed_form(mu, nu, chi_sq));
}

InequalityCheck check_renyi_after_heat(const GridDensity& pi, double smoothness, double t, int q) {
  if (q < 2) throw InvalidParameter("Rényi-after-heat check needs an integer order q >= 2");
  if (!(t >= 0.0) || !(smoothness * q * t < 1.0)) {
    throw PreconditionError("heat-flow time must satisfy 0 <= t < 1/(L q)");
  }
  const double d = pi.grid().dim();
  InequalityCheck c;
  c.rhs = d / (2.0 * (q - 1)) * std::log(1.0 / (1.0 - smoothness * q * t));
  c.lhs = t == 0.0 ? 0.0 : renyi_grid(gaussian_channel(pi, t), pi, q);
  return c;
}

}  // namespace proxfi
