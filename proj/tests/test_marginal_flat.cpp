#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "slgf/design.hpp"
#include "slgf/error.hpp"
#include "slgf/marginal_flat.hpp"

using namespace slgf;

namespace {

SufficientStats homo(Eigen::Index N, Eigen::Index P, double ssr) {
  SufficientStats s;
  s.N = N;
  s.P = P;
  s.ss_resid = ssr;
  return s;
}

SufficientStats split(Eigen::Index n1, Eigen::Index p1, double ssr1, Eigen::Index n2, Eigen::Index p2, double ssr2) {
  SufficientStats s;
  s.N = n1 + n2;
  s.P = p1 + p2;
  s.n1 = n1;
  s.n2 = n2;
  s.p1 = p1;
  s.p2 = p2;
  s.ss_resid1 = ssr1;
  s.ss_resid2 = ssr2;
  s.ss_resid = ssr1 + ssr2;
  s.grouped = true;
  s.separable = true;
  return s;
}

ErrorCategory category_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  return ErrorCategory::contract_violation;
}

}  // namespace

TEST_SUITE("marginal_flat") {
  TEST_CASE("fractional exponent") {
    const ModelSpec tw4{Layout::twoway, 4, GroupingScheme::parse(6, "1,2,5:3,4,6")};
    const FractionalConfig a = fbf_exponent(tw4, PriorSystem::gprior, 12, 10);
    CHECK(a.m0 == 3);
    CHECK(a.b == 0.25);
    const FractionalConfig b = fbf_exponent({Layout::ancova, 1, std::nullopt}, PriorSystem::flat, 40, 1);
    CHECK(b.m0 == 2);
    CHECK(b.b == 0.05);
    const FractionalConfig c = fbf_exponent({Layout::twoway, 1, std::nullopt}, PriorSystem::gprior, 50, 14);
    CHECK(c.m0 == 2);
    CHECK(c.b == 0.04);
    CHECK(category_of([] { fbf_exponent({Layout::ancova, 5, std::nullopt}, PriorSystem::flat, 9, 8); }) ==
          ErrorCategory::insufficient_data);
  }

  TEST_CASE("closed form propriety at m0/N") {
    // Every Gamma argument (N b - P)/2 is positive at b = m0/N.
    for (int P = 1; P <= 8; ++P) {
      const FractionalConfig cfg = fbf_exponent({Layout::ancova, 3, std::nullopt}, PriorSystem::flat, 40, P);
      CHECK(std::isfinite(logq_flat_homoscedastic(homo(40, P, 3.0), cfg)));
    }
  }

  TEST_CASE("small homoscedastic example") {
    const double v = logq_flat_homoscedastic(homo(4, 1, 1.0), {2, 0.5});
    CHECK(std::abs(v - std::log(0.25 / std::numbers::pi)) <= 1e-12);
    CHECK(std::abs(v - oracle::staged_flat_homoscedastic(4, 1, 1.0, 0.5)) <= 1e-8);
  }

  TEST_CASE("b = 1 gives zero") {
    CHECK(std::abs(logq_flat_homoscedastic(homo(10, 3, 2.5), {10, 1.0})) <= 1e-10);
    CHECK(std::abs(logq_flat_hetero_separable(split(6, 2, 1.0, 7, 2, 3.0), {13, 1.0})) <= 1e-10);
    const Dataset d = fixtures::ancova(3, 4, 4, 2.0);
    const DesignMatrices dm = build_model_matrix(d, {Layout::ancova, 7, GroupingScheme::parse(4, "1,2:3,4")});
    CHECK(logq_flat_hetero_laplace(dm, fixtures::response(d), {16, 1.0}) == 0.0);
  }

  TEST_CASE("grouped residuals enter through their sum") {
    const FractionalConfig cfg{5, 0.5};
    SufficientStats g = homo(10, 4, 5.0);
    g.grouped = true;
    g.ss_resid1 = 2.0;
    g.ss_resid2 = 3.0;
    CHECK(logq_flat_homoscedastic(g, cfg) == logq_flat_homoscedastic(homo(10, 4, 5.0), cfg));
  }

  TEST_CASE("separable closed form matches staged quadrature") {
    const double b = 2.0 / 3.0;
    const double v = logq_flat_hetero_separable(split(3, 1, 1.0, 3, 1, 2.0), {4, b});
    CHECK(std::abs(v - oracle::staged_flat_separable(3, 1, 1.0, 3, 1, 2.0, b)) <= 1e-8);

    // Identical groups: twice the per-group staged value.
    const double same = logq_flat_hetero_separable(split(6, 2, 1.7, 6, 2, 1.7), {6, 0.5});
    CHECK(std::abs(same - 2.0 * (oracle::staged_block(6, 2, 1.7, 1.0) - oracle::staged_block(6, 2, 1.7, 0.5))) <= 1e-8);
  }

  TEST_CASE("errors") {
    CHECK(category_of([] { logq_flat_homoscedastic(homo(6, 3, 1.0), {3, 0.5}); }) == ErrorCategory::insufficient_data);
    CHECK(category_of([] { logq_flat_homoscedastic(homo(6, 1, 0.0), {3, 0.5}); }) == ErrorCategory::degenerate_fit);
    CHECK(category_of([] { logq_flat_hetero_separable(split(4, 2, 1.0, 8, 1, 1.0), {4, 1.0 / 3.0}); }) ==
          ErrorCategory::insufficient_data);
    SufficientStats shared = split(6, 2, 1.0, 6, 2, 1.0);
    shared.separable = false;
    CHECK(category_of([&] { logq_flat_hetero_separable(shared, {6, 0.5}); }) == ErrorCategory::contract_violation);
  }

  TEST_CASE("separable design through the Laplace path") {
    // Each block is exp(-a*lambda - c*exp(-lambda)) in lambda, for which the
    // Laplace error is Stirling's: a log a - a + log(2 pi)/2 - log(a)/2 - lgamma(a).
    const auto stirling_gap = [](double a) {
      return a * std::log(a) - a + 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(a) - std::lgamma(a);
    };
    for (int per : {3, 4, 6}) {
      const Dataset d = fixtures::ancova(5, 4, per, 1.5);
      const ModelSpec spec{Layout::ancova, 8, GroupingScheme::parse(4, "1,2:3,4")};
      const DesignMatrices dm = build_model_matrix(d, spec);
      const SufficientStats s = sufficient_stats(dm, fixtures::response(d));
      REQUIRE(s.separable);
      const FractionalConfig cfg = fbf_exponent(spec, PriorSystem::flat, dm.observations(), dm.columns());
      const double closed = logq_flat_hetero_separable(s, cfg);
      const double lap = logq_flat_hetero_laplace(dm, fixtures::response(d), cfg);
      double predicted = 0.0;
      for (const auto& [n, p] : {std::pair{s.n1, s.p1}, std::pair{s.n2, s.p2}}) {
        const auto nd = static_cast<double>(n), pd = static_cast<double>(p);
        predicted += stirling_gap((nd - pd) / 2.0) - stirling_gap((nd * cfg.b - pd) / 2.0);
      }
      CHECK(std::abs(lap - closed - predicted) <= 1e-5);
    }
  }

  TEST_CASE("cubature oracle reproduces the separable closed form") {
    const Dataset d = fixtures::ancova(6, 4, 4, 2.0);
    const ModelSpec spec{Layout::ancova, 8, GroupingScheme::parse(4, "1,3:2,4")};
    const DesignMatrices dm = build_model_matrix(d, spec);
    const Eigen::VectorXd y = fixtures::response(d);
    const SufficientStats s = sufficient_stats(dm, y);
    const FractionalConfig cfg = fbf_exponent(spec, PriorSystem::flat, 16, dm.columns());
    const Eigen::VectorXd yg = dm.gather(y);
    const Eigen::Index n1 = dm.group_split->first;
    const auto cub = [&](double b) {
      return oracle::log_integrate_2d(
          [&](double l1, double l2) { return oracle::flat_hetero_log_density(dm.x, yg, n1, b, l1, l2); },
          {0.0, 0.0}, 40.0, 1e-10);
    };
    CHECK(cub(1.0) - cub(cfg.b) == doctest::Approx(logq_flat_hetero_separable(s, cfg)).epsilon(1e-7));
  }

  TEST_CASE("shared-slope heteroscedastic Laplace against 2-D cubature") {
    // The fractional integrand is far from Gaussian in each log-variance, so
    // the Laplace error is a few tenths. Balanced schemes share nearly the same
    // error; a one-level group of four observations carries a larger one.
    const Dataset d = fixtures::ancova(7, 4, 4, 2.0);
    const Eigen::VectorXd y = fixtures::response(d);
    std::vector<double> errors;
    for (const char* label : {"1,2:3,4", "1,3:2,4", "1:2,3,4"}) {
      const ModelSpec spec{Layout::ancova, 7, GroupingScheme::parse(4, label)};
      const DesignMatrices dm = build_model_matrix(d, spec);
      const FractionalConfig cfg = fbf_exponent(spec, PriorSystem::flat, 16, dm.columns());
      const double lap = logq_flat_hetero_laplace(dm, y, cfg);
      const Eigen::VectorXd yg = dm.gather(y);
      const Eigen::Index n1 = dm.group_split->first;
      const auto cub = [&](double b) {
        return oracle::log_integrate_2d(
            [&](double l1, double l2) { return oracle::flat_hetero_log_density(dm.x, yg, n1, b, l1, l2); },
            {0.0, 0.0}, 40.0, 1e-9);
      };
      errors.push_back(lap - (cub(1.0) - cub(cfg.b)));
    }
    for (double e : errors) {
      CHECK(e > 0.0);
      CHECK(e < 0.5);
    }
    CHECK(std::abs(errors[0] - errors[1]) <= 0.05);
    CHECK(errors[2] > errors[0]);
  }

  TEST_CASE("scaling y leaves Bayes factors between like models unchanged") {
    const Dataset d = fixtures::ancova(9, 4, 4, 1.0);
    Dataset scaled = d;
    for (auto& v : scaled.y) v *= 3.7;
    for (int c : {4, 8}) {
      const ModelSpec m1{Layout::ancova, c, GroupingScheme::parse(4, "1,2:3,4")};
      const ModelSpec m2{Layout::ancova, c, GroupingScheme::parse(4, "1,3:2,4")};
      const auto lq = [&](const Dataset& data, const ModelSpec& m) {
        const DesignMatrices dm = build_model_matrix(data, m);
        const SufficientStats s = sufficient_stats(dm, fixtures::response(data));
        const FractionalConfig cfg = fbf_exponent(m, PriorSystem::flat, dm.observations(), dm.columns());
        return m.heteroscedastic() ? logq_flat_hetero_separable(s, cfg) : logq_flat_homoscedastic(s, cfg);
      };
      const double before = lq(d, m1) - lq(d, m2);
      const double after = lq(scaled, m1) - lq(scaled, m2);
      CHECK(std::abs(before - after) <= 1e-8);
    }
  }
}
