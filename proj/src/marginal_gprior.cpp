#include "slgf/marginal_gprior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/Polynomials>

#include "slgf/error.hpp"
#include "slgf/laplace.hpp"

namespace slgf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogPi = std::log(std::numbers::pi);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Exponent of g in the integrand's g^{-c} factor on each scale.
double g_power(GScale scale) { return scale == GScale::g ? 1.5 : 0.5; }

// The g-dependent part of the log-integrand on the given scale.
double g_shape(double g, double N, double b, double p, double q, GScale scale) {
  if (!(g > 0.0)) return kNegInf;
  const double Nb = N * b;
  return (Nb - p - 1.0) / 2.0 * std::log1p(b * g) - (Nb - 1.0) / 2.0 * std::log1p(b * g * q) -
         g_power(scale) * std::log(g) - N / (2.0 * g);
}

double polish_root(const Eigen::Vector4d& c, double g) {
  for (int i = 0; i < 8; ++i) {
    const double f = ((c(0) * g + c(1)) * g + c(2)) * g + c(3);
    const double df = (3.0 * c(0) * g + 2.0 * c(1)) * g + c(2);
    if (df == 0.0) break;
    const double next = g - f / df;
    if (!(next > 0.0)) break;
    if (std::abs(next - g) <= 1e-15 * g) {
      g = next;
      break;
    }
    g = next;
  }
  return g;
}

double fallback_mode(double N, double b, double p, double q, GScale scale) {
  const auto neg = [&](double t) { return -g_shape(std::exp(t), N, b, p, q, scale); };
  const double lo = std::log(1e-6), hi = std::log(1e6);
  constexpr int kGrid = 240;
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double v = neg(lo + (hi - lo) * i / kGrid);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  if (best == 0 || best == kGrid) {
    fail(ErrorCategory::approximation_failure, "g integrand has no interior mode in [1e-6, 1e6]");
  }
  const double step = (hi - lo) / kGrid;
  const auto r = boost::math::tools::brent_find_minima(neg, lo + (best - 1) * step, lo + (best + 1) * step, 52);
  return std::exp(r.first);
}

}  // namespace

double log_inverse_gamma_half(double g, double N) {
  if (!(g > 0.0)) return kNegInf;
  return 0.5 * std::log(N / 2.0) - std::lgamma(0.5) - 1.5 * std::log(g) - N / (2.0 * g);
}

double log_g_integrand(double g, double N, double b, double p, double r_squared, double sst) {
  if (!(g > 0.0)) return kNegInf;
  const double Nb = N * b;
  const double q = 1.0 - r_squared;
  return std::lgamma((Nb - 1.0) / 2.0) - Nb / 2.0 * std::log(b) - (Nb - 1.0) / 2.0 * kLogPi -
         0.5 * std::log(N) - (Nb - 1.0) / 2.0 * std::log(sst) +
         (Nb - p - 1.0) / 2.0 * std::log1p(b * g) - (Nb - 1.0) / 2.0 * std::log1p(b * g * q) +
         log_inverse_gamma_half(g, N);
}

Eigen::Vector4d g_mode_cubic(double N, double b, double p, double r_squared, GScale scale) {
  const double q = 1.0 - r_squared;
  const double c = g_power(scale);
  const double Nb = N * b;
  return {-b * b * q * (p + 2.0 * c),
          b * (Nb - p - 1.0) + b * q - 2.0 * c * b * (1.0 + q),
          Nb * (1.0 + q) - 2.0 * c,
          N};
}

double solve_g_mode(double N, double b, double p, double r_squared, GScale scale) {
  require(b > 0.0 && b <= 1.0, "fractional exponent must lie in (0, 1]");
  require(r_squared >= 0.0 && r_squared < 1.0, "R^2 must lie in [0, 1)");
  const double q = 1.0 - r_squared;
  const Eigen::Vector4d c = g_mode_cubic(N, b, p, r_squared, scale);
  const double cmax = c.cwiseAbs().maxCoeff();

  std::vector<double> candidates;
  const auto collect = [&](const auto& solver) {
    for (const auto& z : solver.roots()) {
      if (z.real() > 0.0 && std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z))) {
        candidates.push_back(polish_root(c, z.real()));
      }
    }
  };
  if (std::abs(c(0)) > 1e-14 * cmax) {
    Eigen::PolynomialSolver<double, 3> solver;
    solver.compute(Eigen::Vector4d(c(3), c(2), c(1), c(0)));
    collect(solver);
  } else {
    Eigen::PolynomialSolver<double, 2> solver;
    solver.compute(Eigen::Vector3d(c(3), c(2), c(1)));
    collect(solver);
  }

  double best = 0.0;
  double best_v = kNegInf;
  for (double g : candidates) {
    const double v = g_shape(g, N, b, p, q, scale);
    if (v > best_v) {
      best_v = v;
      best = g;
    }
  }
  if (best_v == kNegInf) return fallback_mode(N, b, p, q, scale);
  return best;
}

double g_log_hessian(double g, double N, double b, double p, double r_squared, GScale scale) {
  const double q = 1.0 - r_squared;
  const double Nb = N * b;
  const double second = 0.5 * ((Nb - 1.0) * b * b * q * q / std::pow(1.0 + q * b * g, 2) -
                               (Nb - p - 1.0) * b * b / std::pow(1.0 + b * g, 2) + 3.0 / (g * g) -
                               2.0 * N / (g * g * g));
  if (scale == GScale::g) return second;
  const double first = (Nb - p - 1.0) / 2.0 * b / (1.0 + b * g) - (Nb - 1.0) / 2.0 * b * q / (1.0 + b * g * q) -
                       1.5 / g + N / (2.0 * g * g);
  return g * first + g * g * second;
}

double logq_gprior_homoscedastic(const SufficientStats& stats, const FractionalConfig& cfg) {
  require(cfg.b > 0.0 && cfg.b <= 1.0, "fractional exponent must lie in (0, 1]");
  const auto N = static_cast<double>(stats.N);
  const auto p = static_cast<double>(stats.P - 1);
  if (!(N * cfg.b > 1.0)) {
    fail(ErrorCategory::insufficient_data, "g-prior marginal needs N*b > 1");
  }
  if (!(stats.sst > 0.0)) fail(ErrorCategory::degenerate_fit, "response has zero total variation");
  const double r2 = std::min(stats.r_squared, 1.0 - 1e-15);

  const auto log_integral = [&](double b) {
    const double g = solve_g_mode(N, b, p, r2, GScale::log_g);
    const double h = g_log_hessian(g, N, b, p, r2, GScale::log_g);
    if (!(h < 0.0)) {
      fail(ErrorCategory::approximation_failure,
           "g integrand is not log-concave at its mode g = " + std::to_string(g));
    }
    return 0.5 * kLog2Pi - 0.5 * std::log(-h) + log_g_integrand(g, N, b, p, r2, stats.sst) + std::log(g);
  };
  return log_integral(1.0) - log_integral(cfg.b);
}

GPriorHeteroIntegrand::GPriorHeteroIntegrand(const DesignMatrices& dm, const Eigen::VectorXd& y_obs, double b)
    : b_(b) {
  require(dm.group_split.has_value(), "heteroscedastic integrand needs a grouped design");
  require(dm.columns() >= 1, "design has no columns");
  Eigen::VectorXd y = dm.gather(y_obs);
  y.array() -= y.mean();
  std::tie(n1_, n2_) = *dm.group_split;
  p_ = dm.columns() - 1;

  Eigen::MatrixXd z = dm.x;
  for (Eigen::Index j = 1; j < z.cols(); ++j) z.col(j).array() -= z.col(j).mean();
  const auto z1 = z.topRows(n1_);
  const auto z2 = z.bottomRows(n2_);
  g1_ = z1.transpose() * z1;
  g2_ = z2.transpose() * z2;
  h1_ = z1.transpose() * y.head(n1_);
  h2_ = z2.transpose() * y.tail(n2_);
  s1_ = y.head(n1_).squaredNorm();
  s2_ = y.tail(n2_).squaredNorm();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.x);
  const Eigen::VectorXd r = y - dm.x * qr.solve(y);
  const double pooled = r.squaredNorm() / static_cast<double>(r.size());
  const auto safe = [&](double ss, Eigen::Index n) {
    const double v = ss / static_cast<double>(n);
    return std::log(v > 1e-12 * pooled ? v : pooled);
  };
  start_ = {safe(r.head(n1_).squaredNorm(), n1_), safe(r.tail(n2_).squaredNorm(), n2_)};
}

double GPriorHeteroIntegrand::operator()(double lambda1, double lambda2, double g) const {
  if (!(g > 0.0)) return kNegInf;
  const double phi1 = std::exp(-lambda1);
  const double phi2 = std::exp(-lambda2);
  if (!std::isfinite(phi1) || !std::isfinite(phi2) || phi1 == 0.0 || phi2 == 0.0) return kNegInf;

  const Eigen::MatrixXd S = phi1 * g1_ + phi2 * g2_;
  double logdet_x = 0.0;
  Eigen::MatrixXd M = b_ * S;
  if (p_ > 0) {
    const Eigen::MatrixXd xpx = S.bottomRightCorner(p_, p_);
    Eigen::LLT<Eigen::MatrixXd> lx(xpx);
    if (lx.info() != Eigen::Success) return kNegInf;
    logdet_x = 2.0 * lx.matrixLLT().diagonal().array().log().sum();
    M.bottomRightCorner(p_, p_) += xpx / g;
  }
  Eigen::LLT<Eigen::MatrixXd> lm(M);
  if (lm.info() != Eigen::Success) return kNegInf;
  const double logdet_m = 2.0 * lm.matrixLLT().diagonal().array().log().sum();
  const Eigen::VectorXd c = b_ * (phi1 * h1_ + phi2 * h2_);
  const double quad = b_ * (phi1 * s1_ + phi2 * s2_) - c.dot(lm.solve(c));

  const auto N = static_cast<double>(n1_ + n2_);
  return -(N * b_ - 1.0) / 2.0 * kLog2Pi +
         b_ / 2.0 * (static_cast<double>(n1_) * std::log(phi1) + static_cast<double>(n2_) * std::log(phi2)) -
         static_cast<double>(p_) / 2.0 * std::log(g) + 0.5 * logdet_x - 0.5 * logdet_m - 0.5 * quad +
         log_inverse_gamma_half(g, N);
}

double GPriorHeteroIntegrand::on_log_scale(const Eigen::VectorXd& x) const {
  const double g = std::exp(x(2));
  return (*this)(x(0), x(1), g) + x(2);
}

double logq_gprior_hetero(const DesignMatrices& dm, const Eigen::VectorXd& y, const FractionalConfig& cfg) {
  require(cfg.b > 0.0 && cfg.b <= 1.0, "fractional exponent must lie in (0, 1]");
  const auto log_integral = [&](double b) {
    const GPriorHeteroIntegrand f(dm, y, b);
    const Eigen::Vector2d lam = f.residual_log_variances();
    const double pooled = 0.5 * (lam(0) + lam(1));
    const double t0 = std::log(static_cast<double>(f.observations()));
    const LogDensity fn = [&f](const Eigen::VectorXd& x) { return f.on_log_scale(x); };
    return laplace_log_integral(
        laplace_fit(fn, {Eigen::Vector3d(lam(0), lam(1), t0), Eigen::Vector3d(pooled, pooled, t0)}));
  };
  return log_integral(1.0) - log_integral(cfg.b);
}

double log_cauchy_prior_density(const Eigen::VectorXd& beta, const Eigen::MatrixXd& scale_matrix) {
  require(beta.size() == scale_matrix.rows() && scale_matrix.rows() == scale_matrix.cols(),
          "Cauchy density dimensions disagree");
  Eigen::LLT<Eigen::MatrixXd> llt(scale_matrix);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCategory::contract_violation, "Cauchy scale matrix is not positive definite");
  }
  const double k = (static_cast<double>(beta.size()) + 1.0) / 2.0;
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return std::lgamma(k) - k * kLogPi + 0.5 * logdet - k * std::log1p(beta.dot(scale_matrix * beta));
}

double cauchy_prior_density(const Eigen::VectorXd& beta, const Eigen::MatrixXd& scale_matrix) {
  return std::exp(log_cauchy_prior_density(beta, scale_matrix));
}

}  // namespace slgf
