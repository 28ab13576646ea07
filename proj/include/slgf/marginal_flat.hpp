#pragma once

#include <Eigen/Dense>

#include "slgf/design.hpp"

namespace slgf {

struct FractionalConfig {
  int m0 = 0;
  double b = 1.0;
};

/// m0 counts the parameters with improper priors: every regression column
/// plus the variances under the flat system, the intercept plus the variances
/// under the g-prior. Throws insufficient_data when N <= m0.
FractionalConfig fbf_exponent(const ModelSpec& spec, PriorSystem prior, Eigen::Index N, Eigen::Index P);

/// Log fractional marginal with one variance and a flat prior on (beta, log sigma^2).
double logq_flat_homoscedastic(const SufficientStats& stats, const FractionalConfig& cfg);

/// Same, for two variances when the design factorizes by group.
double logq_flat_hetero_separable(const SufficientStats& stats, const FractionalConfig& cfg);

/// Integrand over (lambda1, lambda2) = (log sigma1^2, log sigma2^2) after the
/// regression effects are integrated out, raised to the power b.
class FlatHeteroIntegrand {
 public:
  FlatHeteroIntegrand(const DesignMatrices& dm, const Eigen::VectorXd& y, double b);

  double operator()(const Eigen::VectorXd& lambda) const;
  /// Variances of the pooled least-squares residuals within each group.
  Eigen::Vector2d residual_log_variances() const { return start_; }

 private:
  double b_;
  Eigen::Index n1_, n2_, P_;
  Eigen::MatrixXd g1_, g2_;
  Eigen::VectorXd h1_, h2_;
  double s1_ = 0.0, s2_ = 0.0;
  Eigen::Vector2d start_;
};

/// Laplace ratio for heteroscedastic designs that share parameters across groups.
double logq_flat_hetero_laplace(const DesignMatrices& dm, const Eigen::VectorXd& y,
                                const FractionalConfig& cfg);

}  // namespace slgf
