#pragma once

// prox_{hf}(y) = argmin_x f(x) + |x - y|^2 / (2h). For h < 1/L the objective is
// (1/h - L)-strongly convex and (1/h + L)-smooth, so the minimiser is unique.

#include <optional>
#include <vector>

#include "proxfi/ledger.hpp"
#include "proxfi/targets.hpp"

namespace proxfi {

enum class ProxMethod { gradient_descent, damped_newton_1d };

struct ProxConfig {
  // Stopping threshold on |grad f(x) + (x - y)/h|. Unset means 1e-10 / h.
  std::optional<double> grad_tolerance;
  int max_iterations = 10000;
  ProxMethod method = ProxMethod::gradient_descent;

  double tolerance_for(double h) const { return grad_tolerance ? *grad_tolerance : 1e-10 / h; }
};

struct ProxResult {
  Vector x;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;  // filled when requested
};

// Throws PreconditionError unless 0 < h < 1/L, NonConvergence when the
// iteration budget runs out (carrying the final residual).
ProxResult prox_solve(const Potential& potential, double h, const Vector& y, const ProxConfig& config,
                      QueryLedger* ledger = nullptr, bool record_objective = false);

Vector prox(const Potential& potential, double h, const Vector& y, const ProxConfig& config = {},
            QueryLedger* ledger = nullptr);

// |grad f(x_star) + (x_star - y)/h|
double verify_prox_optimality(const Potential& potential, double h, const Vector& y, const Vector& x_star);

}  // namespace proxfi
