#pragma once

#include <Eigen/Dense>

#include "slgf/design.hpp"
#include "slgf/marginal_flat.hpp"

namespace slgf {

// Throughout, p is the number of non-intercept regression columns and the
// hyperparameter carries the IG(1/2, N/2) prior.

/// Coordinate in which the g integral is taken. On the log scale the
/// integrand picks up the Jacobian g.
enum class GScale { g, log_g };

struct GPriorState {
  double g = 0.0;
  double g_mode = 0.0;
  Eigen::MatrixXd hessian_at_mode;
};

/// log IG(g; 1/2, N/2).
double log_inverse_gamma_half(double g, double N);

/// log P^b(Y, g | m) for one variance, as a function of g.
double log_g_integrand(double g, double N, double b, double p, double r_squared, double sst);

/// Cubic coefficients (highest degree first) whose positive roots are the
/// stationary points of the integrand on the requested scale.
Eigen::Vector4d g_mode_cubic(double N, double b, double p, double r_squared, GScale scale = GScale::g);

/// Positive root of the stationarity cubic maximizing the integrand; falls
/// back to a bracketed search when the cubic has no usable root.
double solve_g_mode(double N, double b, double p, double r_squared, GScale scale = GScale::g);

/// Second derivative of the log-integrand at g, on the requested scale.
double g_log_hessian(double g, double N, double b, double p, double r_squared, GScale scale = GScale::g);

/// Log fractional marginal for one variance: two 1-D Laplace fits in log g.
double logq_gprior_homoscedastic(const SufficientStats& stats, const FractionalConfig& cfg);

/// Integrand over (lambda1, lambda2, g) with the intercept and the effects
/// integrated out, raised to the power b. The non-intercept columns are
/// centered by their ordinary means.
class GPriorHeteroIntegrand {
 public:
  GPriorHeteroIntegrand(const DesignMatrices& dm, const Eigen::VectorXd& y, double b);

  /// Density with respect to d lambda1 d lambda2 dg.
  double operator()(double lambda1, double lambda2, double g) const;
  /// Same point with respect to d lambda1 d lambda2 d(log g).
  double on_log_scale(const Eigen::VectorXd& x) const;
  Eigen::Vector2d residual_log_variances() const { return start_; }
  Eigen::Index observations() const { return n1_ + n2_; }

 private:
  double b_;
  Eigen::Index n1_, n2_, p_;
  Eigen::MatrixXd g1_, g2_;
  Eigen::VectorXd h1_, h2_;
  double s1_ = 0.0, s2_ = 0.0;
  Eigen::Vector2d start_;
};

/// Log fractional marginal for two variances: two 3-D Laplace fits over
/// (lambda1, lambda2, log g).
double logq_gprior_hetero(const DesignMatrices& dm, const Eigen::VectorXd& y, const FractionalConfig& cfg);

/// Multivariate Cauchy density with location 0 and scale A^{-1}, where
/// A = X^T Phi X / N is passed in.
double cauchy_prior_density(const Eigen::VectorXd& beta, const Eigen::MatrixXd& scale_matrix);
double log_cauchy_prior_density(const Eigen::VectorXd& beta, const Eigen::MatrixXd& scale_matrix);

}  // namespace slgf
