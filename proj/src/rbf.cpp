#include "htcflow/rbf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "htcflow/error.hpp"

namespace htc::rbf {

double phi(Kernel kernel, double eps, double r) noexcept {
  const double er = eps * r;
  switch (kernel) {
    case Kernel::gaussian: return std::exp(-er * er);
    case Kernel::multiquadric: return std::sqrt(1.0 + er * er);
  }
  return 0.0;
}

Model::Model(std::vector<Point3> centers, Eigen::VectorXd coefficients, Kernel kernel, double shape_eps,
             double ridge, double condition_estimate)
    : centers_(std::move(centers)),
      coefficients_(std::move(coefficients)),
      kernel_(kernel),
      shape_eps_(shape_eps),
      ridge_(ridge),
      condition_estimate_(condition_estimate) {}

double Model::eval(const Point3& x) const noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    s += coefficients_[static_cast<Eigen::Index>(j)] * phi(kernel_, shape_eps_, (x - centers_[j]).norm());
  }
  return s;
}

std::vector<double> Model::eval(std::span<const Point3> points) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval(p));
  return out;
}

double default_shape(std::span<const Point3> centers) {
  if (centers.size() < 2) return 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (i != j) best = std::min(best, (centers[i] - centers[j]).norm());
    }
    total += best;
  }
  const double mean = total / static_cast<double>(centers.size());
  if (!(mean > 0.0)) throw Error(Errc::duplicate_centers, "default_shape: coincident centers");
  return 1.0 / mean;
}

Model fit(std::span<const Point3> centers, std::span<const double> values, const FitOptions& options) {
  const std::size_t n = centers.size();
  if (n == 0) throw Error(Errc::invalid_argument, "rbf::fit: no centers");
  if (values.size() != n) {
    throw Error(Errc::invalid_argument, "rbf::fit: " + std::to_string(n) + " centers but " +
                                            std::to_string(values.size()) + " values");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!centers[i].allFinite() || !std::isfinite(values[i])) {
      throw Error(Errc::non_finite_value, "rbf::fit: non-finite input");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((centers[i] - centers[j]).norm() <= 1e-12) {
        throw Error(Errc::duplicate_centers,
                    "rbf::fit: centers " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
  const double eps = options.shape_eps.value_or(default_shape(centers));
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(Errc::invalid_argument, "rbf::fit: shape_eps must be > 0");

  const auto en = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a(en, en);
  for (Eigen::Index i = 0; i < en; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = phi(options.kernel, eps, (centers[i] - centers[j]).norm());
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  const double ridge = options.ridge.value_or(1e-10 * a.trace() / static_cast<double>(n));
  if (!(ridge >= 0.0)) throw Error(Errc::invalid_argument, "rbf::fit: ridge must be >= 0");
  a.diagonal().array() += ridge;

  Eigen::VectorXd w(en);
  for (Eigen::Index i = 0; i < en; ++i) w[i] = values[static_cast<std::size_t>(i)];

  Eigen::VectorXd c;
  double rcond = 0.0;
  bool solved = false;
  if (options.kernel == Kernel::gaussian) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      rcond = llt.rcond();
      if (rcond > 0.0) {
        c = llt.solve(w);
        solved = c.allFinite();
      }
    }
  }
  if (!solved) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    rcond = lu.rcond();
    if (rcond > 0.0 && std::isfinite(rcond)) {
      c = lu.solve(w);
      solved = c.allFinite();
    }
  }
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!solved) {
    throw Error(Errc::singular_system, "rbf::fit: system is singular (condition estimate " + std::to_string(cond) + ")");
  }
  return Model(std::vector<Point3>(centers.begin(), centers.end()), std::move(c), options.kernel, eps, ridge, cond);
}

}  // namespace htc::rbf
