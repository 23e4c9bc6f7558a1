#include "proxfi/stats.hpp"

#include <algorithm>
#include <cmath>

#include "proxfi/errors.hpp"

namespace proxfi {

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidParameter("K-S statistic of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_statistic(std::vector<double> samples, const GridDensity& reference) {
  const auto cdf = cumulative(reference);
  return ks_statistic(std::move(samples),
                      [&](double x) { return interpolate_cdf(reference.grid(), cdf, x); });
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidParameter("K-S statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0) / static_cast<double>(n));
}

double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

Moments moments(std::span<const double> x) {
  if (x.size() < 2) throw InvalidParameter("moments need at least two samples");
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double c = (v - m) * (v - m);
    m2 += c;
    m4 += c * c;
  }
  Moments out;
  out.mean = m;
  out.variance = m2 / (n - 1.0);
  out.mean_se = std::sqrt(out.variance / n);
  const double s2 = m2 / n;
  out.variance_se = std::sqrt(std::max(0.0, (m4 / n - s2 * s2) / n));
  return out;
}

double batch_means_se(std::span<const double> x, std::size_t batches) {
  if (batches < 2 || x.size() < 2 * batches) throw InvalidParameter("series too short for batch means");
  const std::size_t len = x.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < len; ++i) means[b] += x[b * len + i];
    means[b] /= static_cast<double>(len);
  }
  return moments(means).mean_se;
}

}  // namespace proxfi
