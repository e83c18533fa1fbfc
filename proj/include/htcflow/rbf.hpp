#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "htcflow/geometry.hpp"

namespace htc::rbf {

enum class Kernel { gaussian, multiquadric };

/// phi(r) for the chosen kernel and shape parameter eps (1/m).
double phi(Kernel kernel, double eps, double r) noexcept;

struct FitOptions {
  Kernel kernel = Kernel::gaussian;
  /// Shape parameter; nullopt selects default_shape(centers).
  std::optional<double> shape_eps;
  /// Diagonal regularization; nullopt selects 1e-10 * trace(Phi) / n.
  std::optional<double> ridge;
};

/// Condition estimates above this are flagged on the model but do not fail the fit.
constexpr double kConditionWarning = 1e14;

/// Interpolant s(x) = sum_j c_j phi(|x - x_j|). Immutable once fitted.
class Model {
 public:
  Model(std::vector<Point3> centers, Eigen::VectorXd coefficients, Kernel kernel, double shape_eps, double ridge,
        double condition_estimate);

  const std::vector<Point3>& centers() const noexcept { return centers_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  Kernel kernel() const noexcept { return kernel_; }
  double shape_eps() const noexcept { return shape_eps_; }
  double ridge() const noexcept { return ridge_; }
  double condition_estimate() const noexcept { return condition_estimate_; }
  bool ill_conditioned() const noexcept { return condition_estimate_ > kConditionWarning; }

  double eval(const Point3& x) const noexcept;
  std::vector<double> eval(std::span<const Point3> points) const;

 private:
  std::vector<Point3> centers_;
  Eigen::VectorXd coefficients_;
  Kernel kernel_;
  double shape_eps_;
  double ridge_;
  double condition_estimate_;
};

/// Solves (Phi + ridge I) c = values. Throws Error{duplicate_centers | singular_system | invalid_argument}.
Model fit(std::span<const Point3> centers, std::span<const double> values, const FitOptions& options = {});

/// 1 / (mean nearest-neighbour distance); 1 for fewer than two centers.
double default_shape(std::span<const Point3> centers);

}  // namespace htc::rbf
