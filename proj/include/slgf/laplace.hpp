#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace slgf {

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct LaplaceState {
  Eigen::VectorXd mode;
  Eigen::MatrixXd hessian;
  double log_value_at_mode = 0.0;
  // Already folded into log_value_at_mode by callers that integrate on a
  // transformed scale; kept for diagnostics.
  double jacobian_log = 0.0;
};

struct MaximizeOptions {
  int max_evaluations = 10000;
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-8;
  double initial_step = 0.5;
};

struct MaximizeResult {
  Eigen::VectorXd mode;
  double value = 0.0;
  int evaluations = 0;
};

/// Nelder-Mead on -f with simplex restarts, followed by a few safeguarded
/// Newton steps on finite-difference derivatives. Throws non_convergence when
/// the evaluation cap is hit.
MaximizeResult maximize_log_density(const LogDensity& f, const Eigen::VectorXd& x0,
                                    const MaximizeOptions& options = {});

/// Central differences with h_j = 1e-4 * max(1, |x_j|), symmetrized.
Eigen::MatrixXd finite_diff_hessian(const LogDensity& f, const Eigen::VectorXd& x);
Eigen::VectorXd finite_diff_gradient(const LogDensity& f, const Eigen::VectorXd& x);

/// (d/2) log 2pi - 1/2 log|-H| + log f(mode). Throws approximation_failure
/// when -H is not positive definite.
double laplace_log_integral(const LaplaceState& state);

/// Maximizes from each start in turn, then from a perturbed copy of the
/// first, and returns the first fit that passes the gradient and curvature
/// checks. Throws approximation_failure with diagnostics otherwise.
LaplaceState laplace_fit(const LogDensity& f, const std::vector<Eigen::VectorXd>& starts);

}  // namespace slgf
