#pragma once

#include <cstdint>

namespace proxfi {

// Oracle query counts. Merging is associative and commutative.
struct QueryLedger {
  std::uint64_t f_evals = 0;
  std::uint64_t grad_evals = 0;
  std::uint64_t prox_calls = 0;
  std::uint64_t inner_steps = 0;

  QueryLedger& operator+=(const QueryLedger& o) {
    f_evals += o.f_evals;
    grad_evals += o.grad_evals;
    prox_calls += o.prox_calls;
    inner_steps += o.inner_steps;
    return *this;
  }
  friend QueryLedger operator+(QueryLedger a, const QueryLedger& b) { return a += b; }
  friend bool operator==(const QueryLedger&, const QueryLedger&) = default;

  std::uint64_t total() const { return f_evals + grad_evals; }
};

}  // namespace proxfi
