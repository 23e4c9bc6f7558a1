#include "proxfi/kernels.hpp"

namespace proxfi::kernels::scalar {

namespace {
constexpr std::size_t kLanes = 16;

// Mirrors the AVX2 lane layout: four 4-wide accumulators, combined as
// (a0 + a1) + (a2 + a3), then lanes reduced as (l0 + l2) + (l1 + l3).
double reduce_lanes(const double (&acc)[kLanes]) {
  double v[4];
  for (int l = 0; l < 4; ++l) {
    v[l] = (acc[l] + acc[4 + l]) + (acc[8 + l] + acc[12 + l]);
  }
  return (v[0] + v[2]) + (v[1] + v[3]);
}
}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += a[i + l] * b[i + l];
  }
  double total = reduce_lanes(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

double sum(const double* x, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += x[i + l];
  }
  double total = reduce_lanes(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

}  // namespace proxfi::kernels::scalar
