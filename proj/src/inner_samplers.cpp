#include "proxfi/inner_samplers.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "proxfi/divergences.hpp"
#include "proxfi/errors.hpp"
#include "proxfi/grid.hpp"
#include "proxfi/grid_oracle.hpp"

namespace proxfi {

void InnerSamplerConfig::validate() const {
  if (!(step_size > 0.0)) throw InvalidParameter("inner sampler step size must be positive");
  if (n_steps < 1) throw InvalidParameter("inner sampler needs n_steps >= 1");
  if (burn_in < 0) throw InvalidParameter("inner sampler burn-in must be nonnegative");
}

std::string to_string(InnerMethod m) {
  switch (m) {
    case InnerMethod::mala: return "mala";
    case InnerMethod::ula: return "ula";
    case InnerMethod::exact_gaussian: return "exact_gaussian";
  }
  return "mala";
}

InnerMethod parse_inner_method(const std::string& s) {
  if (s == "mala") return InnerMethod::mala;
  if (s == "ula") return InnerMethod::ula;
  if (s == "exact_gaussian") return InnerMethod::exact_gaussian;
  throw ConfigError("unknown inner sampler '" + s + "'");
}

namespace {

Vector start_point(const Potential& target) {
  return target.mode_hint() ? *target.mode_hint() : Vector::Zero(target.dim());
}

// log q(b | a) up to the shared normalising constant.
double log_proposal(double step, const Vector& a, const Vector& grad_a, const Vector& b) {
  return -(b - a + step * grad_a).squaredNorm() / (4.0 * step);
}

}  // namespace

double mala_log_acceptance(const Potential& target, double step, const Vector& x, const Vector& x_prop) {
  const Vector gx = target.gradient(x);
  const Vector gp = target.gradient(x_prop);
  return target.value(x) - target.value(x_prop) + log_proposal(step, x_prop, gp, x) - log_proposal(step, x, gx, x_prop);
}

InnerDraw mala_sample(const Potential& target, const InnerSamplerConfig& config, Rng& rng) {
  config.validate();
  const double step = config.step_size;
  const double noise = std::sqrt(2.0 * step);
  InnerDraw out;
  out.x = start_point(target);
  double fx = target.value(out.x);
  Vector gx = target.gradient(out.x);
  out.queries.f_evals = 1;
  out.queries.grad_evals = 1;
  for (int s = 0; s < config.total_steps(); ++s) {
    const Vector prop = out.x - step * gx + noise * standard_normal(target.dim(), rng);
    const double fp = target.value(prop);
    const Vector gp = target.gradient(prop);
    ++out.queries.f_evals;
    ++out.queries.grad_evals;
    const double log_ratio = fx - fp + log_proposal(step, prop, gp, out.x) - log_proposal(step, out.x, gx, prop);
    // The uniform is drawn every step so the stream position does not depend on the ratio.
    const double u = uniform01(rng);
    if (log_ratio >= 0.0 || std::log(u) < log_ratio) {
      out.x = prop;
      fx = fp;
      gx = gp;
      ++out.accepted;
    }
  }
  out.queries.inner_steps = static_cast<std::uint64_t>(config.total_steps());
  return out;
}

Vector exact_gaussian_inner(const Potential& target, Rng& rng) {
  const auto& g = target.gaussian();
  if (!g) throw InvalidParameter("exact Gaussian inner sampler needs a Gaussian target");
  return g->mean + std::sqrt(g->variance) * standard_normal(target.dim(), rng);
}

InnerDraw sample_inner(const Potential& target, const InnerSamplerConfig& config, Rng& rng) {
  switch (config.method) {
    case InnerMethod::mala:
      return mala_sample(target, config, rng);
    case InnerMethod::ula: {
      config.validate();
      const Vector x0 = start_point(target);
      auto path = ula_chain(target, config.step_size, config.total_steps(), [&](Rng&) { return x0; }, rng);
      InnerDraw out;
      out.x = path.path.back();
      out.queries = path.queries;
      out.queries.inner_steps = static_cast<std::uint64_t>(config.total_steps());
      return out;
    }
    case InnerMethod::exact_gaussian: {
      InnerDraw out;
      out.x = exact_gaussian_inner(target, rng);
      return out;
    }
  }
  throw InvalidParameter("unknown inner sampler");
}

UlaPath ula_chain(const Potential& target, double step, int steps, const InitSampler& init, Rng& rng) {
  if (!(step > 0.0) || !(step * target.smoothness() < 1.0)) throw PreconditionError("ULA requires 0 < step < 1/L");
  if (steps < 0) throw InvalidParameter("ULA step count must be nonnegative");
  const double noise = std::sqrt(2.0 * step);
  UlaPath out;
  out.path.reserve(static_cast<std::size_t>(steps) + 1);
  out.path.push_back(init(rng));
  if (out.path.front().size() != target.dim()) throw DimensionMismatch("ULA initial point has the wrong dimension");
  for (int k = 0; k < steps; ++k) {
    const Vector& x = out.path.back();
    Vector next = x - step * target.gradient(x) + noise * standard_normal(target.dim(), rng);
    out.path.push_back(std::move(next));
  }
  out.queries.grad_evals = static_cast<std::uint64_t>(steps);
  return out;
}

MalaCalibrationRow calibrate_mala_gaussian(double step, int n_steps) {
  if (!(step > 0.0) || n_steps < 1) throw InvalidParameter("invalid MALA calibration point");
  // nu = N(0, 1/3): V(u) = 3u^2/2.
  const Grid g = Grid::line(-6.0, 6.0, 481);
  const Axis& a = g.axis(0);
  std::vector<double> u(a.n), v(a.n), dv(a.n);
  for (int i = 0; i < a.n; ++i) {
    u[i] = a.node(i);
    v[i] = 1.5 * u[i] * u[i];
    dv[i] = 3.0 * u[i];
  }
  auto law = mala_nodal_law(u, v, dv, step, n_steps);
  GridDensity rho(g, std::move(law));
  rho.normalize();
  const auto nu = GridDensity::from_log_density(g, [](const Vector& x) { return -1.5 * x(0) * x(0); });
  // Nodal laws: the K-S distance is the largest gap of the discrete CDFs.
  double ks = 0.0, cr = 0.0, cn = 0.0;
  const double dx = a.spacing();
  for (std::size_t i = 0; i < g.size(); ++i) {
    cr += rho.values()[i] * dx;
    cn += nu.values()[i] * dx;
    ks = std::max(ks, std::abs(cr - cn));
  }
  MalaCalibrationRow row;
  row.step = step;
  row.n_steps = n_steps;
  row.measured_ks = ks;
  row.measured_r3_gaussian = renyi_grid(rho, nu, 3.0);
  return row;
}

std::vector<MalaCalibrationRow> mala_calibration_table() {
  std::vector<MalaCalibrationRow> rows;
  for (double step : {0.01, 0.02, 0.05}) {
    for (int n : {4, 8, 16, 32}) rows.push_back(calibrate_mala_gaussian(step, n));
  }
  // The default inner configuration.
  rows.push_back(calibrate_mala_gaussian(0.1, 100));
  return rows;
}

std::string calibration_csv(const std::vector<MalaCalibrationRow>& rows) {
  std::string out = "# mala_calibration schema_version=1\n";
  out += "target_class,d,step,n_steps,measured_ks,measured_r3_gaussian\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%d,%.17g,%.17g\n", r.target_class.c_str(), r.dim, r.step, r.n_steps,
                  r.measured_ks, r.measured_r3_gaussian);
    out += buf;
  }
  return out;
}

std::vector<MalaCalibrationRow> parse_calibration_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<MalaCalibrationRow> rows;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "target_class,d,step,n_steps,measured_ks,measured_r3_gaussian") {
        throw ConfigError("unexpected calibration header '" + line + "'");
      }
      header = true;
      continue;
    }
    std::istringstream fields(line);
    std::string cell[6];
    for (auto& c : cell) {
      if (!std::getline(fields, c, ',')) throw ConfigError("short calibration row '" + line + "'");
    }
    MalaCalibrationRow r;
    r.target_class = cell[0];
    r.dim = std::stoi(cell[1]);
    r.step = std::stod(cell[2]);
    r.n_steps = std::stoi(cell[3]);
    r.measured_ks = std::stod(cell[4]);
    r.measured_r3_gaussian = std::stod(cell[5]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace proxfi
