#include "slgf/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "slgf/error.hpp"

namespace slgf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class CountedObjective {
 public:
  CountedObjective(const LogDensity& f, int cap) : f_(f), cap_(cap) {}

  // Minimization target; non-finite log densities act as walls.
  double operator()(const Eigen::VectorXd& x) {
    if (++count_ > cap_) {
      fail(ErrorCategory::non_convergence,
           "maximizer exceeded " + std::to_string(cap_) + " evaluations");
    }
    const double v = f_(x);
    return std::isfinite(v) ? -v : kInf;
  }

  int count() const { return count_; }

 private:
  const LogDensity& f_;
  int cap_;
  int count_ = 0;
};

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> fx;
};

Simplex make_simplex(CountedObjective& obj, const Eigen::VectorXd& x0, double best, double step) {
  const auto d = x0.size();
  Simplex s;
  s.x.push_back(x0);
  s.fx.push_back(best);
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXd v = x0;
    v(j) += step * std::max(1.0, std::abs(x0(j)));
    s.x.push_back(v);
    s.fx.push_back(obj(v));
  }
  return s;
}

void nelder_mead(CountedObjective& obj, Simplex& s, const MaximizeOptions& opt) {
  const std::size_t n = s.x.size();
  std::vector<std::size_t> idx(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.fx[a] < s.fx[b]; });
    const std::size_t lo = idx.front(), hi = idx.back(), nh = idx[n - 2];

    const double fbest = s.fx[lo];
    const double spread = s.fx[hi] - fbest;
    double diam = 0.0;
    for (std::size_t i = 0; i < n; ++i) diam = std::max(diam, (s.x[i] - s.x[lo]).lpNorm<Eigen::Infinity>());
    const double fscale = 1.0 + std::abs(fbest);
    const double xscale = 1.0 + s.x[lo].lpNorm<Eigen::Infinity>();
    if (std::isfinite(spread) && spread <= opt.f_tolerance * fscale && diam <= opt.x_tolerance * xscale) return;
    if (std::isfinite(spread) && spread <= 1e-15 * fscale && diam <= 1e-4 * xscale) return;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(s.x[0].size());
    for (std::size_t i = 0; i < n; ++i)
      if (i != hi) centroid += s.x[i];
    centroid /= static_cast<double>(n - 1);

    const Eigen::VectorXd xr = centroid + (centroid - s.x[hi]);
    const double fr = obj(xr);
    if (fr < s.fx[lo]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - s.x[hi]);
      const double fe = obj(xe);
      if (fe < fr) {
        s.x[hi] = xe;
        s.fx[hi] = fe;
      } else {
        s.x[hi] = xr;
        s.fx[hi] = fr;
      }
      continue;
    }
    if (fr < s.fx[nh]) {
      s.x[hi] = xr;
      s.fx[hi] = fr;
      continue;
    }
    const bool outside = fr < s.fx[hi];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid)) : Eigen::VectorXd(centroid + 0.5 * (s.x[hi] - centroid));
    const double fc = obj(xc);
    if (fc < (outside ? fr : s.fx[hi])) {
      s.x[hi] = xc;
      s.fx[hi] = fc;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == lo) continue;
      s.x[i] = s.x[lo] + 0.5 * (s.x[i] - s.x[lo]);
      s.fx[i] = obj(s.x[i]);
    }
  }
}

double finite_or_throw(const LogDensity& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "log density is not finite at probe point (" << x.transpose() << ")";
    fail(ErrorCategory::evaluation, os.str());
  }
  return v;
}

std::string describe(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ")";
  return os.str();
}

}  // namespace

Eigen::VectorXd finite_diff_gradient(const LogDensity& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd p = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(j)));
    p(j) = x(j) + h;
    const double fp = finite_or_throw(f, p);
    p(j) = x(j) - h;
    const double fm = finite_or_throw(f, p);
    p(j) = x(j);
    g(j) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd finite_diff_hessian(const LogDensity& f, const Eigen::VectorXd& x) {
  const auto d = x.size();
  Eigen::VectorXd h(d);
  for (Eigen::Index j = 0; j < d; ++j) h(j) = 1e-4 * std::max(1.0, std::abs(x(j)));
  const double f0 = finite_or_throw(f, x);
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    p(i) = x(i) + h(i);
    const double fp = finite_or_throw(f, p);
    p(i) = x(i) - h(i);
    const double fm = finite_or_throw(f, p);
    p(i) = x(i);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          p(i) = x(i) + si * h(i);
          p(j) = x(j) + sj * h(j);
          acc += si * sj * finite_or_throw(f, p);
        }
      }
      p(i) = x(i);
      p(j) = x(j);
      H(i, j) = H(j, i) = acc / (4.0 * h(i) * h(j));
    }
  }
  return 0.5 * (H + H.transpose());
}

MaximizeResult maximize_log_density(const LogDensity& f, const Eigen::VectorXd& x0,
                                    const MaximizeOptions& options) {
  CountedObjective obj(f, options.max_evaluations);
  double best = obj(x0);
  if (!std::isfinite(best)) {
    fail(ErrorCategory::evaluation, "log density is not finite at the start point " + describe(x0));
  }
  Eigen::VectorXd x = x0;
  double step = options.initial_step;
  for (int round = 0; round < 20; ++round) {
    Simplex s = make_simplex(obj, x, best, step);
    nelder_mead(obj, s, options);
    const auto lo = static_cast<std::size_t>(std::min_element(s.fx.begin(), s.fx.end()) - s.fx.begin());
    const double gain = best - s.fx[lo];
    x = s.x[lo];
    best = s.fx[lo];
    if (round > 0 && gain <= options.f_tolerance * (1.0 + std::abs(best))) break;
    step = 1e-2;
  }

  // Newton polish: the simplex pins the objective, not the argument.
  for (int it = 0; it < 10; ++it) {
    const Eigen::VectorXd g = finite_diff_gradient(f, x);
    if (g.norm() <= 1e-9 * (1.0 + std::abs(best))) break;
    const Eigen::MatrixXd H = finite_diff_hessian(f, x);
    Eigen::LLT<Eigen::MatrixXd> llt(-H);
    if (llt.info() != Eigen::Success) break;
    Eigen::VectorXd dx = llt.solve(g);
    bool moved = false;
    for (int half = 0; half < 30; ++half) {
      const Eigen::VectorXd trial = x + dx;
      const double ft = f(trial);
      if (std::isfinite(ft) && -ft <= best + 1e-13 * (1.0 + std::abs(best))) {
        x = trial;
        best = std::min(best, -ft);
        moved = true;
        break;
      }
      dx *= 0.5;
    }
    if (!moved) break;
  }
  return {x, -best, obj.count()};
}

double laplace_log_integral(const LaplaceState& state) {
  const auto d = state.mode.size();
  Eigen::LLT<Eigen::MatrixXd> llt(-state.hessian);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCategory::approximation_failure,
         "negative Hessian is not positive definite at mode " + describe(state.mode));
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  return 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * logdet +
         state.log_value_at_mode;
}

LaplaceState laplace_fit(const LogDensity& f, const std::vector<Eigen::VectorXd>& starts) {
  require(!starts.empty(), "laplace_fit needs at least one start point");
  std::vector<Eigen::VectorXd> tries = starts;
  Eigen::VectorXd perturbed = starts.front();
  for (Eigen::Index j = 0; j < perturbed.size(); ++j) perturbed(j) += (j % 2 == 0 ? 0.5 : -0.5);
  tries.push_back(perturbed);

  std::string last;
  for (const auto& x0 : tries) {
    try {
      const MaximizeResult m = maximize_log_density(f, x0);
      const Eigen::VectorXd g = finite_diff_gradient(f, m.mode);
      if (g.norm() > 1e-6 * (1.0 + std::abs(m.value))) {
        last = "gradient norm " + std::to_string(g.norm()) + " at mode " + describe(m.mode);
        continue;
      }
      LaplaceState st{m.mode, finite_diff_hessian(f, m.mode), m.value, 0.0};
      Eigen::LLT<Eigen::MatrixXd> llt(-st.hessian);
      if (llt.info() != Eigen::Success) {
        last = "Hessian not negative definite at mode " + describe(m.mode);
        continue;
      }
      return st;
    } catch (const Error& e) {
      last = e.what();
    }
  }
  fail(ErrorCategory::approximation_failure, "Laplace fit failed: " + last);
}

}  // namespace slgf
