#pragma once

// Nonlinear least squares (Levenberg-Marquardt) and orthogonal distance
// regression with linearized parameter uncertainties.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "planarcav/errors.hpp"

namespace planarcav {

struct ParamBound {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct FitModel {
  std::vector<std::string> names;
  std::function<double(std::span<const double> params, double x)> f;
  std::vector<ParamBound> bounds;  // empty, or one entry per parameter

  std::size_t size() const { return names.size(); }
  void validate() const;
};

struct FitData {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma_y;  // empty: unit weights
};

struct OdrData {
  std::vector<double> x;
  std::vector<double> sigma_x;
  std::vector<double> y;
  std::vector<double> sigma_y;
};

struct FitOptions {
  int max_iterations = 500;
  double initial_lambda = 1e-3;
  double lambda_factor = 10.0;
  double relative_tolerance = 1e-10;  // on the objective decrease
  double step_tolerance = 1e-12;      // on the internal step norm
  /// true: sigma_y are absolute errors; false: scale the covariance by chi2 / dof.
  bool absolute_sigma = false;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> parameters;
  std::vector<double> std_errors;
  Eigen::MatrixXd covariance;
  double chi_squared = 0.0;  // weighted sum of squared residuals
  std::size_t dof = 0;
  double r_squared = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
  std::vector<double> objective_history;  // after each accepted step, starting at the initial value
  std::vector<double> x_adjusted;         // ODR only: fitted latent abscissae

  double value(const std::string& name) const;
  double error(const std::string& name) const;
  std::size_t index(const std::string& name) const;
};

/// Raised when the normal equations are singular at the solution. Carries the
/// best parameters found; their uncertainties are NaN.
class DegenerateFit : public Error {
 public:
  DegenerateFit(const std::string& what, FitResult partial) : Error(what), partial_(std::move(partial)) {}
  const char* kind() const noexcept override { return "degenerate_fit"; }
  const FitResult& partial() const noexcept { return partial_; }

 private:
  FitResult partial_;
};

FitResult fit_least_squares(const FitModel& model, const FitData& data, std::span<const double> initial,
                            const FitOptions& options = {});

/// Minimizes sum_i (y_i - f(xt_i))^2 / sy_i^2 + (x_i - xt_i)^2 / sx_i^2 over the
/// parameters and the latent abscissae xt_i. For each trial parameter vector the
/// latent abscissae are solved point by point; the parameters then take a
/// Levenberg-Marquardt step on the resulting profile objective.
FitResult fit_odr(const FitModel& model, const OdrData& data, std::span<const double> initial,
                  const FitOptions& options = {});

}  // namespace planarcav
