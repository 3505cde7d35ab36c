#include "planarcav/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace planarcav {
namespace {

using Residuals = std::function<bool(std::span<const double> p, std::span<double> r)>;

// Maps an unconstrained internal coordinate u onto the parameter box.
struct Transform {
  ParamBound b;

  bool lower() const { return std::isfinite(b.lower); }
  bool upper() const { return std::isfinite(b.upper); }

  double to_param(double u) const {
    if (lower() && upper()) return b.lower + (b.upper - b.lower) / (1.0 + std::exp(-u));
    if (lower()) return b.lower + std::exp(u);
    if (upper()) return b.upper - std::exp(u);
    return u;
  }
  double to_internal(double p) const {
    if (lower() && upper()) return std::log((p - b.lower) / (b.upper - p));
    if (lower()) return std::log(p - b.lower);
    if (upper()) return std::log(b.upper - p);
    return p;
  }
  double derivative(double u) const {
    if (lower() && upper()) {
      const double s = 1.0 / (1.0 + std::exp(-u));
      return (b.upper - b.lower) * s * (1.0 - s);
    }
    if (lower()) return std::exp(u);
    if (upper()) return -std::exp(u);
    return 1.0;
  }
  // Start strictly inside the box so the internal coordinate is finite.
  double nudge_inside(double p) const {
    const double width = (lower() && upper()) ? b.upper - b.lower : std::max(1.0, std::abs(p));
    const double eps = 1e-9 * width;
    if (lower() && p <= b.lower) p = b.lower + eps;
    if (upper() && p >= b.upper) p = b.upper - eps;
    return p;
  }
};

std::vector<Transform> transforms_for(const FitModel& model) {
  std::vector<Transform> t(model.size());
  if (!model.bounds.empty()) {
    for (std::size_t k = 0; k < t.size(); ++k) t[k].b = model.bounds[k];
  }
  return t;
}

double sum_squares(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

// Central differences in parameter space, one-sided next to a bound.
bool jacobian(const Residuals& res, std::span<const double> p, const std::vector<Transform>& tr, std::size_t m,
              Eigen::MatrixXd& J) {
  const std::size_t n = p.size();
  J.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  std::vector<double> q(p.begin(), p.end()), rp(m), rm(m);
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  for (std::size_t k = 0; k < n; ++k) {
    double h = base * std::max(1.0, std::abs(p[k]));
    double hi = p[k] + h, lo = p[k] - h;
    if (tr[k].upper() && hi > tr[k].b.upper) hi = p[k];
    if (tr[k].lower() && lo < tr[k].b.lower) lo = p[k];
    if (hi == lo) return false;
    q[k] = hi;
    if (!res(q, rp)) return false;
    q[k] = lo;
    if (!res(q, rm)) return false;
    q[k] = p[k];
    for (std::size_t i = 0; i < m; ++i) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (rp[i] - rm[i]) / (hi - lo);
  }
  return true;
}

struct Outcome {
  std::vector<double> p;
  std::vector<double> r;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> history;
};

Outcome levenberg_marquardt(const Residuals& res, std::size_t m, std::span<const double> initial,
                            const std::vector<Transform>& tr, const FitOptions& opt) {
  const std::size_t n = initial.size();
  Outcome out;
  Eigen::VectorXd u(static_cast<Eigen::Index>(n));
  out.p.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double p0 = tr[k].nudge_inside(initial[k]);
    u[static_cast<Eigen::Index>(k)] = tr[k].to_internal(p0);
    out.p[k] = tr[k].to_param(u[static_cast<Eigen::Index>(k)]);
  }
  out.r.resize(m);
  if (!res(out.p, out.r)) throw ConfigError("model is not finite at the initial parameters");
  out.objective = sum_squares(out.r);
  out.history.push_back(out.objective);

  double lambda = opt.initial_lambda;
  std::vector<double> trial_p(n), trial_r(m);
  Eigen::MatrixXd Jp;
  for (out.iterations = 0; out.iterations < opt.max_iterations;) {
    if (out.objective == 0.0) {
      out.converged = true;
      out.message = "zero residual";
      return out;
    }
    if (!jacobian(res, out.p, tr, m, Jp)) {
      out.message = "model not finite while differentiating";
      return out;
    }
    ++out.iterations;
    Eigen::MatrixXd Ju = Jp;
    for (std::size_t k = 0; k < n; ++k) Ju.col(static_cast<Eigen::Index>(k)) *= tr[k].derivative(u[static_cast<Eigen::Index>(k)]);
    const Eigen::Map<const Eigen::VectorXd> r(out.r.data(), static_cast<Eigen::Index>(m));
    const Eigen::MatrixXd A = Ju.transpose() * Ju;
    const Eigen::VectorXd g = Ju.transpose() * r;
    Eigen::VectorXd D = A.diagonal();
    const double dmax = D.maxCoeff();
    for (Eigen::Index k = 0; k < D.size(); ++k) D[k] = std::max(D[k], dmax > 0.0 ? 1e-12 * dmax : 1.0);

    bool accepted = false;
    Eigen::VectorXd step;
    double decrease = 0.0;
    while (!accepted) {
      Eigen::MatrixXd M = A;
      M.diagonal() += lambda * D;
      step = M.ldlt().solve(-g);
      if (step.allFinite()) {
        const Eigen::VectorXd un = u + step;
        for (std::size_t k = 0; k < n; ++k) trial_p[k] = tr[k].to_param(un[static_cast<Eigen::Index>(k)]);
        if (res(trial_p, trial_r)) {
          const double s = sum_squares(trial_r);
          if (std::isfinite(s) && s < out.objective) {
            decrease = (out.objective - s) / out.objective;
            u = un;
            out.p = trial_p;
            out.r = trial_r;
            out.objective = s;
            out.history.push_back(s);
            lambda = std::max(lambda / opt.lambda_factor, 1e-15);
            accepted = true;
            break;
          }
        }
      }
      lambda *= opt.lambda_factor;
      if (lambda > 1e16) {
        out.converged = true;
        out.message = "no further decrease possible";
        return out;
      }
    }
    if (decrease < opt.relative_tolerance) {
      out.converged = true;
      out.message = "relative objective decrease below tolerance";
      return out;
    }
    if (step.norm() < opt.step_tolerance * (u.norm() + opt.step_tolerance)) {
      out.converged = true;
      out.message = "step below tolerance";
      return out;
    }
  }
  out.message = "iteration cap reached";
  return out;
}

// Fills covariance and errors; throws DegenerateFit if J^T J is singular.
void finish(FitResult& result, const Residuals& res, std::size_t m, const std::vector<Transform>& tr,
            bool scale_by_chi2) {
  const std::size_t n = result.parameters.size();
  Eigen::MatrixXd J;
  auto degenerate = [&](const std::string& why) {
    result.std_errors.assign(n, std::numeric_limits<double>::quiet_NaN());
    result.covariance = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                                  std::numeric_limits<double>::quiet_NaN());
    throw DegenerateFit("degenerate fit: " + why, result);
  };
  if (!jacobian(res, result.parameters, tr, m, J)) degenerate("model not finite near the solution");
  Eigen::VectorXd scale = J.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < scale.size(); ++k) {
    if (!(scale[k] > 0.0)) degenerate("parameter '" + result.names[static_cast<std::size_t>(k)] + "' has no effect on the model");
  }
  const Eigen::MatrixXd Js = J * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Js, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.minCoeff() <= 1e-10 * sv.maxCoeff()) degenerate("normal equations are singular (parameters not identifiable)");
  const Eigen::MatrixXd V = svd.matrixV();
  Eigen::MatrixXd cov = V * sv.array().square().inverse().matrix().asDiagonal() * V.transpose();
  cov = scale.cwiseInverse().asDiagonal() * cov * scale.cwiseInverse().asDiagonal();
  if (scale_by_chi2 && result.dof > 0) cov *= result.chi_squared / static_cast<double>(result.dof);
  result.covariance = cov;
  result.std_errors.resize(n);
  for (std::size_t k = 0; k < n; ++k) result.std_errors[k] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))));
}

void check_initial(const FitModel& model, std::span<const double> initial) {
  model.validate();
  if (initial.size() != model.size()) {
    throw ConfigError("expected " + std::to_string(model.size()) + " initial values, got " + std::to_string(initial.size()));
  }
  for (std::size_t k = 0; k < initial.size(); ++k) {
    if (!std::isfinite(initial[k])) throw ConfigError("initial value of '" + model.names[k] + "' is not finite");
    if (!model.bounds.empty() && (initial[k] < model.bounds[k].lower || initial[k] > model.bounds[k].upper)) {
      throw ConfigError("initial value of '" + model.names[k] + "' lies outside its bounds");
    }
  }
}

double weighted_total_ss(std::span<const double> y, std::span<const double> w) {
  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sw += w[i];
    swy += w[i] * y[i];
  }
  const double mean = swy / sw;
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += w[i] * (y[i] - mean) * (y[i] - mean);
  return ss;
}

double r_squared_from(double ss_res, double ss_tot) {
  if (ss_tot > 0.0) return 1.0 - ss_res / ss_tot;
  return ss_res == 0.0 ? 1.0 : 0.0;
}

}  // namespace

void FitModel::validate() const {
  if (names.empty()) throw ConfigError("fit model needs at least one parameter");
  if (!f) throw ConfigError("fit model has no function");
  if (!bounds.empty()) {
    if (bounds.size() != names.size()) throw ConfigError("fit model bounds must match the parameter count");
    for (std::size_t k = 0; k < bounds.size(); ++k) {
      if (!(bounds[k].lower < bounds[k].upper)) {
        throw ConfigError("bounds of '" + names[k] + "' need lower < upper");
      }
    }
  }
}

std::size_t FitResult::index(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return k;
  }
  throw ConfigError("fit result has no parameter '" + name + "'");
}

double FitResult::value(const std::string& name) const { return parameters.at(index(name)); }
double FitResult::error(const std::string& name) const { return std_errors.at(index(name)); }

FitResult fit_least_squares(const FitModel& model, const FitData& data, std::span<const double> initial,
                            const FitOptions& options) {
  check_initial(model, initial);
  const std::size_t m = data.x.size();
  if (data.y.size() != m || (!data.sigma_y.empty() && data.sigma_y.size() != m)) {
    throw ConfigError("x, y and sigma_y must have the same length");
  }
  if (m <= model.size()) {
    throw InsufficientData("need more data points (" + std::to_string(m) + ") than parameters (" +
                           std::to_string(model.size()) + ")");
  }
  std::vector<double> w(m, 1.0);
  for (std::size_t i = 0; i < data.sigma_y.size(); ++i) {
    if (!(data.sigma_y[i] > 0.0)) throw ConfigError("sigma_y must be positive");
    w[i] = 1.0 / (data.sigma_y[i] * data.sigma_y[i]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(data.x[i]) || !std::isfinite(data.y[i])) throw ConfigError("data contain non-finite values");
  }
  const Residuals res = [&](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < m; ++i) {
      r[i] = (data.y[i] - model.f(p, data.x[i])) * std::sqrt(w[i]);
      if (!std::isfinite(r[i])) return false;
    }
    return true;
  };
  const auto tr = transforms_for(model);
  Outcome o = levenberg_marquardt(res, m, initial, tr, options);

  FitResult result;
  result.names = model.names;
  result.parameters = o.p;
  result.chi_squared = o.objective;
  result.dof = m - model.size();
  result.r_squared = r_squared_from(o.objective, weighted_total_ss(data.y, w));
  result.converged = o.converged;
  result.iterations = o.iterations;
  result.message = o.message;
  result.objective_history = std::move(o.history);
  finish(result, res, m, tr, data.sigma_y.empty() || !options.absolute_sigma);
  return result;
}

namespace {

// Latent abscissa minimizing (y - f(xt))^2 / sy^2 + (x - xt)^2 / sx^2.
struct LatentPoint {
  double xt;
  double objective;
  double y_residual;
};

LatentPoint solve_latent(const FitModel& model, std::span<const double> p, double x, double sx, double y, double sy) {
  auto g = [&](double xt, double& ry) {
    ry = y - model.f(p, xt);
    const double dx = (xt - x) / sx;
    return ry * ry / (sy * sy) + dx * dx;
  };
  double xt = x, ry = 0.0;
  double gc = g(xt, ry);
  if (!std::isfinite(gc)) return {xt, gc, ry};
  for (int it = 0; it < 60; ++it) {
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(std::abs(xt), sx);
    const double d = (model.f(p, xt + h) - model.f(p, xt - h)) / (2.0 * h);
    const double grad = -d * ry / (sy * sy) + (xt - x) / (sx * sx);
    const double hess = d * d / (sy * sy) + 1.0 / (sx * sx);
    double step = -grad / hess;
    if (!std::isfinite(step)) break;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      double ry_new = 0.0;
      const double gn = g(xt + step, ry_new);
      if (std::isfinite(gn) && gn <= gc) {
        improved = gn < gc;
        xt += step;
        gc = gn;
        ry = ry_new;
        break;
      }
      step *= 0.5;
    }
    if (!improved || std::abs(step) <= 1e-15 * (std::abs(xt) + sx)) break;
  }
  return {xt, gc, ry};
}

}  // namespace

FitResult fit_odr(const FitModel& model, const OdrData& data, std::span<const double> initial,
                  const FitOptions& options) {
  check_initial(model, initial);
  const std::size_t m = data.x.size();
  if (data.y.size() != m || data.sigma_x.size() != m || data.sigma_y.size() != m) {
    throw ConfigError("x, sigma_x, y and sigma_y must have the same length");
  }
  if (m <= model.size()) {
    throw InsufficientData("need more data points (" + std::to_string(m) + ") than parameters (" +
                           std::to_string(model.size()) + ")");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!(data.sigma_x[i] > 0.0) || !(data.sigma_y[i] > 0.0)) throw ConfigError("ODR needs sigma_x, sigma_y > 0");
    if (!std::isfinite(data.x[i]) || !std::isfinite(data.y[i])) throw ConfigError("data contain non-finite values");
  }
  // Signed square root of each point's profiled objective.
  const Residuals res = [&](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < m; ++i) {
      const LatentPoint lp = solve_latent(model, p, data.x[i], data.sigma_x[i], data.y[i], data.sigma_y[i]);
      if (!std::isfinite(lp.objective)) return false;
      r[i] = std::copysign(std::sqrt(lp.objective), lp.y_residual);
    }
    return true;
  };
  const auto tr = transforms_for(model);
  Outcome o = levenberg_marquardt(res, m, initial, tr, options);

  FitResult result;
  result.names = model.names;
  result.parameters = o.p;
  result.chi_squared = o.objective;
  result.dof = m - model.size();
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = 1.0 / (data.sigma_y[i] * data.sigma_y[i]);
  result.r_squared = r_squared_from(o.objective, weighted_total_ss(data.y, w));
  result.converged = o.converged;
  result.iterations = o.iterations;
  result.message = o.message;
  result.objective_history = std::move(o.history);
  result.x_adjusted.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    result.x_adjusted[i] =
        solve_latent(model, result.parameters, data.x[i], data.sigma_x[i], data.y[i], data.sigma_y[i]).xt;
  }
  finish(result, res, m, tr, !options.absolute_sigma);
  return result;
}

}  // namespace planarcav
