#include "slgf/marginal_flat.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "slgf/error.hpp"
#include "slgf/laplace.hpp"

namespace slgf {
namespace {

const double kLogPi = std::log(std::numbers::pi);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_b(const FractionalConfig& cfg) {
  require(cfg.b > 0.0 && cfg.b <= 1.0, "fractional exponent must lie in (0, 1]");
}

// Terms shared by both closed forms except the per-block products.
double common_terms(double N, double b) {
  return -N * (1.0 - b) / 2.0 * kLogPi + N * b / 2.0 * std::log(b);
}

double block_term(double n, double p, double ssr, double b) {
  if (!(n * b > p)) {
    fail(ErrorCategory::insufficient_data,
         "fractional sample n*b = " + std::to_string(n * b) + " does not exceed the " +
             std::to_string(static_cast<int>(p)) + " regression parameters");
  }
  if (!(ssr > 0.0)) fail(ErrorCategory::degenerate_fit, "residual sum of squares is zero");
  return -n * (1.0 - b) / 2.0 * std::log(ssr) + std::lgamma((n - p) / 2.0) -
         std::lgamma((n * b - p) / 2.0);
}

Eigen::Vector2d group_log_variances(const DesignMatrices& dm, const Eigen::VectorXd& y) {
  const auto [n1, n2] = *dm.group_split;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.x);
  const Eigen::VectorXd r = y - dm.x * qr.solve(y);
  const double pooled = r.squaredNorm() / static_cast<double>(r.size());
  const auto safe = [&](double ss, Eigen::Index n) {
    const double v = ss / static_cast<double>(n);
    return std::log(v > 1e-12 * pooled ? v : pooled);
  };
  return {safe(r.head(n1).squaredNorm(), n1), safe(r.tail(n2).squaredNorm(), n2)};
}

}  // namespace

FractionalConfig fbf_exponent(const ModelSpec& spec, PriorSystem prior, Eigen::Index N, Eigen::Index P) {
  require(N >= 2, "fractional exponent needs at least two observations");
  const int variances = spec.heteroscedastic() ? 2 : 1;
  FractionalConfig cfg;
  cfg.m0 = prior == PriorSystem::flat ? static_cast<int>(P) + variances : 1 + variances;
  if (N <= cfg.m0) {
    fail(ErrorCategory::insufficient_data,
         std::to_string(N) + " observations do not exceed the minimal training sample of " +
             std::to_string(cfg.m0));
  }
  cfg.b = static_cast<double>(cfg.m0) / static_cast<double>(N);
  return cfg;
}

double logq_flat_homoscedastic(const SufficientStats& stats, const FractionalConfig& cfg) {
  check_b(cfg);
  const auto N = static_cast<double>(stats.N);
  return common_terms(N, cfg.b) + block_term(N, static_cast<double>(stats.P), stats.ss_resid, cfg.b);
}

double logq_flat_hetero_separable(const SufficientStats& stats, const FractionalConfig& cfg) {
  check_b(cfg);
  if (!stats.grouped || !stats.separable) {
    fail(ErrorCategory::contract_violation,
         "closed form needs a design that factorizes by group; use the Laplace path");
  }
  const auto N = static_cast<double>(stats.N);
  return common_terms(N, cfg.b) +
         block_term(static_cast<double>(stats.n1), static_cast<double>(stats.p1), stats.ss_resid1, cfg.b) +
         block_term(static_cast<double>(stats.n2), static_cast<double>(stats.p2), stats.ss_resid2, cfg.b);
}

FlatHeteroIntegrand::FlatHeteroIntegrand(const DesignMatrices& dm, const Eigen::VectorXd& y_obs, double b)
    : b_(b) {
  require(dm.group_split.has_value(), "heteroscedastic integrand needs a grouped design");
  Eigen::VectorXd y = dm.gather(y_obs);
  y.array() -= y.mean();
  std::tie(n1_, n2_) = *dm.group_split;
  P_ = dm.columns();
  const auto x1 = dm.x.topRows(n1_);
  const auto x2 = dm.x.bottomRows(n2_);
  g1_ = x1.transpose() * x1;
  g2_ = x2.transpose() * x2;
  h1_ = x1.transpose() * y.head(n1_);
  h2_ = x2.transpose() * y.tail(n2_);
  s1_ = y.head(n1_).squaredNorm();
  s2_ = y.tail(n2_).squaredNorm();
  start_ = group_log_variances(dm, y);
}

double FlatHeteroIntegrand::operator()(const Eigen::VectorXd& lambda) const {
  const double phi1 = std::exp(-lambda(0));
  const double phi2 = std::exp(-lambda(1));
  if (!std::isfinite(phi1) || !std::isfinite(phi2) || phi1 == 0.0 || phi2 == 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd A = phi1 * g1_ + phi2 * g2_;
  const Eigen::VectorXd h = phi1 * h1_ + phi2 * h2_;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double quad = phi1 * s1_ + phi2 * s2_ - h.dot(llt.solve(h));
  const auto N = static_cast<double>(n1_ + n2_);
  const auto P = static_cast<double>(P_);
  return -(N * b_ - P) / 2.0 * kLog2Pi - P / 2.0 * std::log(b_) +
         b_ / 2.0 * (static_cast<double>(n1_) * std::log(phi1) + static_cast<double>(n2_) * std::log(phi2)) -
         0.5 * logdet - b_ / 2.0 * quad;
}

double logq_flat_hetero_laplace(const DesignMatrices& dm, const Eigen::VectorXd& y,
                                const FractionalConfig& cfg) {
  check_b(cfg);
  const auto log_integral = [&](double b) {
    const FlatHeteroIntegrand f(dm, y, b);
    const Eigen::Vector2d start = f.residual_log_variances();
    const double pooled = 0.5 * (start(0) + start(1));
    const LogDensity fn = [&f](const Eigen::VectorXd& x) { return f(x); };
    return laplace_log_integral(laplace_fit(fn, {start, Eigen::Vector2d(pooled, pooled)}));
  };
  return log_integral(1.0) - log_integral(cfg.b);
}

}  // namespace slgf
