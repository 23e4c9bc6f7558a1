#include "proxfi/prox.hpp"

#include <cmath>
#include <string>

#include "proxfi/errors.hpp"

namespace proxfi {

namespace {

void check_step(const Potential& potential, double h) {
  if (!(h > 0.0)) throw PreconditionError("prox step size must be positive");
  if (!(h * potential.smoothness() < 1.0)) {
    throw PreconditionError("prox requires h < 1/L (h = " + std::to_string(h) +
                            ", L = " + std::to_string(potential.smoothness()) + ")");
  }
}

double objective(const Potential& p, double h, const Vector& y, const Vector& x) {
  return p.value(x) + 0.5 * (x - y).squaredNorm() / h;
}

}  // namespace

ProxResult prox_solve(const Potential& potential, double h, const Vector& y, const ProxConfig& config,
                      QueryLedger* ledger, bool record_objective) {
  check_step(potential, h);
  if (y.size() != potential.dim()) throw DimensionMismatch("prox point dimension mismatch");
  if (config.max_iterations < 1) throw InvalidParameter("prox max_iterations must be >= 1");
  const double tol = config.tolerance_for(h);
  if (!(tol > 0.0)) throw InvalidParameter("prox grad_tolerance must be positive");

  QueryLedger local;
  local.prox_calls = 1;
  ProxResult out;
  out.x = y;

  auto residual_at = [&](const Vector& x, Vector& g) {
    g = potential.gradient(x) + (x - y) / h;
    ++local.grad_evals;
    return g.norm();
  };

  Vector g;
  double res = residual_at(out.x, g);
  if (record_objective) {
    out.objective_trace.push_back(objective(potential, h, y, out.x));
    ++local.f_evals;
  }

  if (config.method == ProxMethod::gradient_descent) {
    const double step = 1.0 / (1.0 / h + potential.smoothness());
    while (res > tol && out.iterations < config.max_iterations) {
      out.x -= step * g;
      ++out.iterations;
      res = residual_at(out.x, g);
      if (record_objective) {
        out.objective_trace.push_back(objective(potential, h, y, out.x));
        ++local.f_evals;
      }
    }
  } else {
    if (potential.dim() != 1) throw InvalidParameter("damped Newton prox is one-dimensional");
    if (!potential.has_hessian()) throw InvalidParameter("damped Newton prox needs a Hessian");
    double obj = objective(potential, h, y, out.x);
    ++local.f_evals;
    while (res > tol && out.iterations < config.max_iterations) {
      const double curvature = potential.hessian(out.x)(0, 0) + 1.0 / h;
      Vector dir = -g / curvature;
      double t = 1.0;
      Vector trial = out.x + dir;
      double trial_obj = objective(potential, h, y, trial);
      ++local.f_evals;
      // Armijo backtracking; curvature >= 1/h - L > 0 so dir is a descent direction.
      while (trial_obj > obj + 1e-4 * t * g.dot(dir) && t > 1e-12) {
        t *= 0.5;
        trial = out.x + t * dir;
        trial_obj = objective(potential, h, y, trial);
        ++local.f_evals;
      }
      out.x = trial;
      obj = trial_obj;
      ++out.iterations;
      res = residual_at(out.x, g);
      if (record_objective) out.objective_trace.push_back(obj);
    }
  }

  out.residual = res;
  if (ledger) *ledger += local;
  if (res > tol) {
    throw NonConvergence("prox did not reach tolerance " + std::to_string(tol) + " in " +
                             std::to_string(config.max_iterations) + " iterations (residual " +
                             std::to_string(res) + ")",
                         res);
  }
  return out;
}

Vector prox(const Potential& potential, double h, const Vector& y, const ProxConfig& config,
            QueryLedger* ledger) {
  return prox_solve(potential, h, y, config, ledger).x;
}

double verify_prox_optimality(const Potential& potential, double h, const Vector& y, const Vector& x_star) {
  return (potential.gradient(x_star) + (x_star - y) / h).norm();
}

}  // namespace proxfi
