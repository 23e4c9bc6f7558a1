#pragma once

// Sample summaries used to compare Monte Carlo output with quadrature laws.

#include <functional>
#include <span>
#include <vector>

#include "proxfi/grid.hpp"

namespace proxfi {

// sup_x |F_n(x) - F(x)| for a continuous reference CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
// Against a 1D grid density (nodal CDF, linear interpolation).
double ks_statistic(std::vector<double> samples, const GridDensity& reference);
// Two-sample statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic one-sample critical value at level alpha.
double ks_critical_value(std::size_t n, double alpha);

double normal_cdf(double x, double mean, double variance);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double mean_se = 0.0;
  double variance_se = 0.0;  // from the fourth central moment
};
Moments moments(std::span<const double> x);

// Standard error of the mean of a correlated series from non-overlapping batch means.
double batch_means_se(std::span<const double> x, std::size_t batches = 50);

}  // namespace proxfi
