#include "proxfi/targets.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "proxfi/errors.hpp"

namespace proxfi {

Potential::Potential(Spec spec) : spec_(std::move(spec)) {
  if (spec_.dim < 1) throw InvalidParameter("potential dimension must be >= 1");
  if (!spec_.value || !spec_.gradient) throw InvalidParameter("potential needs value and gradient");
  if (!(spec_.smoothness >= 0.0) || !std::isfinite(spec_.smoothness)) {
    throw InvalidParameter("smoothness constant must be finite and >= 0");
  }
  if (spec_.strong_convexity < 0.0 || spec_.strong_convexity > spec_.smoothness) {
    throw InvalidParameter("strong convexity must lie in [0, L]");
  }
  if (spec_.mode_hint && spec_.mode_hint->size() != spec_.dim) {
    throw DimensionMismatch("mode hint dimension differs from potential dimension");
  }
}

void Potential::check_dim(const Vector& x) const {
  if (x.size() != spec_.dim) {
    throw DimensionMismatch("point of dimension " + std::to_string(x.size()) +
                            " passed to a potential of dimension " + std::to_string(spec_.dim));
  }
}

double Potential::value(const Vector& x) const {
  check_dim(x);
  return spec_.value(x);
}

Vector Potential::gradient(const Vector& x) const {
  check_dim(x);
  return spec_.gradient(x);
}

Matrix Potential::hessian(const Vector& x) const {
  check_dim(x);
  if (!spec_.hessian) throw InvalidParameter("potential has no Hessian");
  return spec_.hessian(x);
}

double Potential::condition_number() const noexcept {
  if (spec_.strong_convexity <= 0.0) return std::numeric_limits<double>::infinity();
  return spec_.smoothness / spec_.strong_convexity;
}

double Potential::value1(double x) const {
  if (spec_.dim != 1) throw DimensionMismatch("value1 on a multivariate potential");
  return spec_.value(Vector::Constant(1, x));
}

double Potential::derivative1(double x) const {
  if (spec_.dim != 1) throw DimensionMismatch("derivative1 on a multivariate potential");
  return spec_.gradient(Vector::Constant(1, x))(0);
}

Potential make_gaussian(const Vector& mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InvalidParameter("gaussian variance must be positive, got " + std::to_string(variance));
  }
  if (mean.size() < 1) throw InvalidParameter("gaussian mean must be non-empty");
  const double precision = 1.0 / variance;
  const auto d = static_cast<int>(mean.size());
  Potential::Spec s;
  s.dim = d;
  s.value = [mean, precision](const Vector& x) { return 0.5 * precision * (x - mean).squaredNorm(); };
  s.gradient = [mean, precision](const Vector& x) -> Vector { return precision * (x - mean); };
  s.hessian = [d, precision](const Vector&) -> Matrix { return precision * Matrix::Identity(d, d); };
  s.smoothness = precision;
  s.strong_convexity = precision;
  s.mode_hint = mean;
  s.gaussian = GaussianForm{mean, variance};
  return Potential(std::move(s));
}

namespace {

struct MixtureEval {
  double log_density;
  Vector weighted_offset;  // sum_k r_k (x - mu_k)
  Matrix second_moment;    // sum_k r_k (x - mu_k)(x - mu_k)^T
};

MixtureEval eval_mixture(const MixtureForm& m, const Vector& x, bool want_second) {
  const std::size_t n = m.weights.size();
  const double d = static_cast<double>(x.size());
  std::vector<double> logs(n);
  for (std::size_t k = 0; k < n; ++k) {
    logs[k] = std::log(m.weights[k]) - 0.5 * (x - m.means[k]).squaredNorm() / m.variance;
  }
  const double mx = *std::max_element(logs.begin(), logs.end());
  double z = 0.0;
  for (double l : logs) z += std::exp(l - mx);
  MixtureEval e;
  e.log_density = mx + std::log(z) - 0.5 * d * std::log(2.0 * std::numbers::pi * m.variance);
  e.weighted_offset = Vector::Zero(x.size());
  if (want_second) e.second_moment = Matrix::Zero(x.size(), x.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double r = std::exp(logs[k] - mx) / z;
    const Vector off = x - m.means[k];
    e.weighted_offset += r * off;
    if (want_second) e.second_moment += r * off * off.transpose();
  }
  return e;
}

}  // namespace

Potential make_gaussian_mixture(const std::vector<double>& weights, const std::vector<Vector>& means,
                                double common_variance) {
  if (weights.empty() || means.empty()) throw InvalidParameter("empty mixture");
  if (weights.size() != means.size()) throw InvalidParameter("mixture weights and means differ in count");
  if (!(common_variance > 0.0)) throw InvalidParameter("mixture variance must be positive");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || w > 1.0) throw InvalidParameter("mixture weight outside the simplex");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("mixture weights do not sum to 1");
  const auto d = means.front().size();
  for (const auto& mu : means) {
    if (mu.size() != d) throw DimensionMismatch("mixture means have different dimensions");
  }

  double max_sep = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    for (std::size_t j = i + 1; j < means.size(); ++j) {
      max_sep = std::max(max_sep, (means[i] - means[j]).norm());
    }
  }

  MixtureForm form{weights, means, common_variance};
  if (means.size() == 1) return make_gaussian(means.front(), common_variance);

  const double v = common_variance;
  Potential::Spec s;
  s.dim = static_cast<int>(d);
  s.value = [form](const Vector& x) { return -eval_mixture(form, x, false).log_density; };
  s.gradient = [form](const Vector& x) -> Vector {
    return eval_mixture(form, x, false).weighted_offset / form.variance;
  };
  s.hessian = [form](const Vector& x) -> Matrix {
    const auto e = eval_mixture(form, x, true);
    const auto n = x.size();
    const Matrix cov = e.second_moment - e.weighted_offset * e.weighted_offset.transpose();
    return Matrix::Identity(n, n) / form.variance - cov / (form.variance * form.variance);
  };
  // |Hess f| <= 1/v + D^2/v^2: the posterior covariance of the means is at most D^2/4.
  s.smoothness = 1.0 / v + max_sep * max_sep / (v * v);
  s.strong_convexity = 0.0;
  Vector centre = Vector::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < means.size(); ++k) centre += weights[k] * means[k];
  s.mode_hint = centre;
  return Potential(std::move(s));
}

namespace {

struct WellProfile {
  double a, r;
  double g(double x) const {
    const double ax = std::abs(x);
    if (ax <= r) return 0.25 * (x * x - a) * (x * x - a);
    const double s = x > 0 ? 1.0 : -1.0;
    const double xr = s * r, dx = x - xr;
    const double g0 = 0.25 * (r * r - a) * (r * r - a);
    const double g1 = xr * (r * r - a);
    const double g2 = 3.0 * r * r - a;
    return g0 + g1 * dx + 0.5 * g2 * dx * dx;
  }
  double dg(double x) const {
    const double ax = std::abs(x);
    if (ax <= r) return x * (x * x - a);
    const double s = x > 0 ? 1.0 : -1.0;
    const double xr = s * r;
    return xr * (r * r - a) + (3.0 * r * r - a) * (x - xr);
  }
  double d2g(double x) const {
    if (std::abs(x) <= r) return 3.0 * x * x - a;
    return 3.0 * r * r - a;
  }
};

// Relative mass of exp(-g) outside [-r, r], by trapezoid quadrature.
double double_well_outside_mass(const WellProfile& w) {
  const double gmin = 0.0;  // attained at ±sqrt(a) inside the clip radius
  const double span = w.r + 12.0;
  const int n = 200000;
  const double dx = 2.0 * span / n;
  double inside = 0.0, outside = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -span + i * dx;
    const double v = std::exp(-(w.g(x) - gmin)) * ((i == 0 || i == n) ? 0.5 : 1.0);
    (std::abs(x) <= w.r ? inside : outside) += v;
  }
  return outside / (inside + outside);
}

}  // namespace

double double_well_second_derivative(double a, double clip_radius, double x) {
  return WellProfile{a, clip_radius}.d2g(x);
}

Potential make_double_well(double a, double clip_radius, int dim) {
  if (!(a > 0.0)) throw InvalidParameter("double-well depth parameter a must be positive");
  if (!(clip_radius > std::sqrt(a))) throw InvalidParameter("clip radius must exceed the well location");
  if (dim < 1) throw InvalidParameter("double-well dimension must be >= 1");
  const WellProfile w{a, clip_radius};
  const double outside = double_well_outside_mass(w);
  if (!(dim * outside < 1e-12)) {
    throw InvalidParameter("clip radius too small: target mass outside is " + std::to_string(dim * outside));
  }
  Potential::Spec s;
  s.dim = dim;
  s.value = [w](const Vector& x) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) f += w.g(x(i));
    return f;
  };
  s.gradient = [w](const Vector& x) -> Vector {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g(i) = w.dg(x(i));
    return g;
  };
  s.hessian = [w](const Vector& x) -> Matrix {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) h(i, i) = w.d2g(x(i));
    return h;
  };
  // g'' ranges over [-a, 3r^2 - a].
  s.smoothness = std::max(3.0 * clip_radius * clip_radius - a, a);
  s.strong_convexity = 0.0;
  s.mode_hint = Vector::Zero(dim);
  return Potential(std::move(s));
}

Potential make_zero(int dim) {
  Potential::Spec s;
  s.dim = dim;
  s.value = [](const Vector&) { return 0.0; };
  s.gradient = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  s.hessian = [](const Vector& x) -> Matrix { return Matrix::Zero(x.size(), x.size()); };
  s.smoothness = 0.0;
  s.mode_hint = Vector::Zero(dim);
  return Potential(std::move(s));
}

namespace {

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

std::vector<double> parse_args(const std::string& full, const std::string& body) {
  std::vector<double> args;
  if (body.empty()) return args;
  std::stringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || tok.empty()) {
      throw ConfigError("bad numeric argument '" + tok + "' in target '" + full + "'");
    }
    args.push_back(v);
  }
  return args;
}

void expect_arity(const std::string& full, const std::vector<double>& args, std::size_t n) {
  if (args.size() != n) {
    throw ConfigError("target '" + full + "' expects " + std::to_string(n) + " arguments, got " +
                      std::to_string(args.size()));
  }
}

}  // namespace

TargetCatalogEntry parse_target(const std::string& spec) {
  const std::string s = strip(spec);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') {
    throw ConfigError("malformed target '" + spec + "': expected name(args)");
  }
  const std::string name = s.substr(0, open);
  const std::vector<double> args = parse_args(spec, s.substr(open + 1, s.size() - open - 2));

  try {
    if (name == "gaussian") {
      expect_arity(spec, args, 2);
      const Vector mean = Vector::Constant(1, args[0]);
      return {s, make_gaussian(mean, args[1]), GaussianForm{mean, args[1]}};
    }
    if (name == "gaussian2d") {
      expect_arity(spec, args, 3);
      Vector mean(2);
      mean << args[0], args[1];
      return {s, make_gaussian(mean, args[2]), GaussianForm{mean, args[2]}};
    }
    if (name == "mixture2") {
      expect_arity(spec, args, 3);
      std::vector<Vector> means{Vector::Constant(1, args[0]), Vector::Constant(1, args[1])};
      std::vector<double> w{0.5, 0.5};
      return {s, make_gaussian_mixture(w, means, args[2]), MixtureForm{w, means, args[2]}};
    }
    if (name == "doublewell") {
      expect_arity(spec, args, 2);
      return {s, make_double_well(args[0], args[1], 1), std::monostate{}};
    }
    if (name == "doublewell2d") {
      expect_arity(spec, args, 2);
      return {s, make_double_well(args[0], args[1], 2), std::monostate{}};
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError("target '" + spec + "': " + e.what());
  }
  throw ConfigError("unknown target '" + name + "'");
}

}  // namespace proxfi
