#pragma once

// Target distributions pi ∝ exp(-f) with hand-coded derivatives and a certified
// smoothness constant L (operator-norm bound on the Hessian of f).

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace proxfi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Isotropic Gaussian N(mean, variance * I).
struct GaussianForm {
  Vector mean;
  double variance = 1.0;
};

// Equal-covariance mixture sum_k w_k N(means_k, variance * I).
struct MixtureForm {
  std::vector<double> weights;
  std::vector<Vector> means;
  double variance = 1.0;
};

using ClosedForm = std::variant<std::monostate, GaussianForm, MixtureForm>;

class Potential {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  struct Spec {
    int dim = 1;
    ValueFn value;
    GradientFn gradient;
    HessianFn hessian;  // optional
    double smoothness = 0.0;
    double strong_convexity = 0.0;
    std::optional<Vector> mode_hint;
    std::optional<GaussianForm> gaussian;  // set when f is exactly quadratic
  };

  explicit Potential(Spec spec);

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;
  bool has_hessian() const noexcept { return static_cast<bool>(spec_.hessian); }

  int dim() const noexcept { return spec_.dim; }
  double smoothness() const noexcept { return spec_.smoothness; }
  double strong_convexity() const noexcept { return spec_.strong_convexity; }
  // L / alpha; infinite for non-log-concave targets.
  double condition_number() const noexcept;
  const std::optional<Vector>& mode_hint() const noexcept { return spec_.mode_hint; }
  const std::optional<GaussianForm>& gaussian() const noexcept { return spec_.gaussian; }

  // Convenience for 1D targets.
  double value1(double x) const;
  double derivative1(double x) const;

 private:
  void check_dim(const Vector& x) const;
  Spec spec_;
};

Potential make_gaussian(const Vector& mean, double variance);
Potential make_gaussian_mixture(const std::vector<double>& weights, const std::vector<Vector>& means,
                                double common_variance);
// Separable double well sum_i g(x_i) with g(x) = (x^2 - a)^2 / 4 inside
// |x| <= clip_radius and its C^2 quadratic continuation outside.
Potential make_double_well(double a, double clip_radius, int dim = 1);
// f ≡ 0 on R^dim; L = 0. Not normalizable, useful for prox and ULA checks.
Potential make_zero(int dim = 1);

// Second derivative of the 1D double-well profile, used to certify L.
double double_well_second_derivative(double a, double clip_radius, double x);

struct TargetCatalogEntry {
  std::string name;
  Potential potential;
  ClosedForm closed_form;
};

// Grammar (whitespace ignored, numbers in C locale):
//   gaussian(mean, variance)           1D Gaussian
//   gaussian2d(m1, m2, variance)       isotropic 2D Gaussian
//   mixture2(m1, m2, variance)         equal-weight 1D two-component mixture
//   doublewell(a, clip_radius)         1D clipped double well
//   doublewell2d(a, clip_radius)       separable 2D double well
// Unknown names or malformed arguments throw ConfigError naming the token.
TargetCatalogEntry parse_target(const std::string& spec);

}  // namespace proxfi
