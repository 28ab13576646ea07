#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "slgf/design.hpp"
#include "slgf/error.hpp"

using namespace slgf;

namespace {

Dataset fixture(std::uint32_t seed, int K = 4, int per = 3) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> y, x;
  std::vector<std::string> labels;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < per; ++i) {
      const double xi = u(rng);
      x.push_back(xi);
      y.push_back(1.0 + 0.5 * k + 0.3 * xi + z(rng));
      labels.push_back("L" + std::to_string(k));
    }
  }
  return make_dataset(y, labels, x);
}

Eigen::VectorXd response(const Dataset& d) {
  return Eigen::Map<const Eigen::VectorXd>(d.y.data(), static_cast<Eigen::Index>(d.size()));
}

}  // namespace

TEST_SUITE("design") {
  TEST_CASE("column counts") {
    const Dataset d = fixture(1);
    const auto s = GroupingScheme::parse(4, "1,2:3,4");
    CHECK(build_model_matrix(d, {Layout::ancova, 3, std::nullopt}).columns() == 5);
    CHECK(build_model_matrix(d, {Layout::ancova, 4, s}).columns() == 3);
    CHECK(build_model_matrix(d, {Layout::ancova, 5, std::nullopt}).columns() == 8);
    CHECK(build_model_matrix(d, {Layout::ancova, 8, s}).columns() == 4);

    const TwoWayLayout t = builtin_layout("dog-lymphoma");
    const auto ts = GroupingScheme::parse(6, "1,2,5:3,4,6");
    const DesignMatrices two = build_model_matrix(t, {Layout::twoway, 2, ts});
    CHECK(two.columns() == 8);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(two.x);
    CHECK((svd.singularValues().array() > 1e-8).count() == 8);
    CHECK(build_model_matrix(t, {Layout::twoway, 1, std::nullopt}).columns() == 7);
  }

  TEST_CASE("scheme presence is enforced") {
    const Dataset d = fixture(2);
    CHECK_THROWS_AS(build_model_matrix(d, {Layout::ancova, 4, std::nullopt}), Error);
    CHECK_THROWS_AS(build_model_matrix(d, {Layout::ancova, 3, GroupingScheme::parse(4, "1:2,3,4")}), Error);
    for (int c = 1; c <= 8; ++c) {
      CHECK(is_scheme_indexed(Layout::ancova, c) == (c == 4 || c >= 6));
      CHECK(is_heteroscedastic(Layout::ancova, c) == (c == 7 || c == 8));
    }
    for (int c = 1; c <= 4; ++c) {
      CHECK(is_scheme_indexed(Layout::twoway, c) == (c >= 2));
      CHECK(is_heteroscedastic(Layout::twoway, c) == (c >= 3));
    }
  }

  TEST_CASE("rows are sorted group-1-first") {
    const Dataset d = fixture(3);
    const DesignMatrices dm = build_model_matrix(d, {Layout::ancova, 7, GroupingScheme::parse(4, "1,3:2,4")});
    REQUIRE(dm.group_split);
    CHECK(dm.group_split->first == 6);
    for (Eigen::Index i = 0; i < 6; ++i) CHECK(dm.x(i, 1) == 0.0);
    for (Eigen::Index i = 6; i < 12; ++i) CHECK(dm.x(i, 1) == 1.0);
  }

  TEST_CASE("rank deficiency names the block") {
    Dataset d = fixture(4);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.level[i] >= 2) (*d.covariate)[i] = 5.0;
    try {
      build_model_matrix(d, {Layout::ancova, 6, GroupingScheme::parse(4, "1,2:3,4")});
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::numerical);
      CHECK(std::string(e.what()).find("interaction") != std::string::npos);
    }
  }

  TEST_CASE("residuals match a normal-equations solve") {
    const Dataset d = fixture(5, 4, 2);
    const DesignMatrices dm = build_model_matrix(d, {Layout::ancova, 3, std::nullopt});
    const Eigen::VectorXd y = dm.gather(response(d));
    const Eigen::VectorXd beta = (dm.x.transpose() * dm.x).ldlt().solve(dm.x.transpose() * y);
    const double ssr = (y - dm.x * beta).squaredNorm();
    const SufficientStats s = sufficient_stats(dm, response(d));
    CHECK(s.ss_resid == doctest::Approx(ssr).epsilon(1e-10));
    CHECK(s.r_squared >= 0.0);
    CHECK(s.r_squared <= 1.0);
    CHECK(s.q == doctest::Approx(1.0 - s.r_squared));
  }

  TEST_CASE("intercept-only model") {
    const Dataset d = fixture(6);
    const SufficientStats s = sufficient_stats(build_model_matrix(d, {Layout::ancova, 1, std::nullopt}), response(d));
    CHECK(s.ss_resid == doctest::Approx(s.sst).epsilon(1e-12));
    CHECK(s.r_squared == 0.0);
  }

  TEST_CASE("exact fit is degenerate") {
    Dataset d = fixture(7);
    for (std::size_t i = 0; i < d.size(); ++i) d.y[i] = 2.0 + 0.25 * (*d.covariate)[i];
    try {
      sufficient_stats(build_model_matrix(d, {Layout::ancova, 2, std::nullopt}), response(d));
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::degenerate_fit);
    }
  }

  TEST_CASE("residuals do not depend on the coding") {
    const Dataset d = fixture(8);
    const DesignMatrices dm = build_model_matrix(d, {Layout::ancova, 3, std::nullopt});
    const Eigen::Index N = dm.observations();
    Eigen::MatrixXd sum_coded(N, 5);
    for (Eigen::Index i = 0; i < N; ++i) {
      const int k = d.level[static_cast<std::size_t>(i)];
      sum_coded(i, 0) = 1.0;
      for (int j = 0; j < 3; ++j) sum_coded(i, j + 1) = k == j ? 1.0 : (k == 3 ? -1.0 : 0.0);
      sum_coded(i, 4) = (*d.covariate)[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd y = response(d);
    const Eigen::VectorXd b = sum_coded.colPivHouseholderQr().solve(y);
    CHECK(sufficient_stats(dm, y).ss_resid == doctest::Approx((y - sum_coded * b).squaredNorm()).epsilon(1e-10));
  }

  TEST_CASE("nesting never increases the residuals") {
    const Dataset d = fixture(9);
    const Eigen::VectorXd y = response(d);
    double last = INFINITY;
    for (int c : {1, 2, 3, 5}) {
      const double ssr = sufficient_stats(build_model_matrix(d, {Layout::ancova, c, std::nullopt}), y).ss_resid;
      CHECK(ssr <= last * (1.0 + 1e-12));
      last = ssr;
    }
  }

  TEST_CASE("group sorting leaves homoscedastic residuals alone") {
    const Dataset d = fixture(10);
    const Eigen::VectorXd y = response(d);
    const auto s = GroupingScheme::parse(4, "1,4:2,3");
    const DesignMatrices dm = build_model_matrix(d, {Layout::ancova, 4, s});
    Eigen::MatrixXd unsorted(dm.observations(), 3);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      unsorted(r, 0) = 1.0;
      unsorted(r, 1) = s.in_group2(d.level[i]) ? 1.0 : 0.0;
      unsorted(r, 2) = (*d.covariate)[i];
    }
    const Eigen::VectorXd b = unsorted.colPivHouseholderQr().solve(y);
    CHECK(sufficient_stats(dm, y).ss_resid == doctest::Approx((y - unsorted * b).squaredNorm()).epsilon(1e-10));
  }

  TEST_CASE("separable designs split the residuals") {
    const Dataset d = fixture(11);
    const Eigen::VectorXd y = response(d);
    const auto s = GroupingScheme::parse(4, "1,2:3,4");
    const SufficientStats viii = sufficient_stats(build_model_matrix(d, {Layout::ancova, 8, s}), y);
    CHECK(viii.separable);
    CHECK(viii.ss_resid == doctest::Approx(viii.ss_resid1 + viii.ss_resid2).epsilon(1e-12));
    const SufficientStats vii = sufficient_stats(build_model_matrix(d, {Layout::ancova, 7, s}), y);
    CHECK_FALSE(vii.separable);
  }
  TEST_CASE("per-group residuals survive repeated columns") {
    // Group-2 rows of a class VIII design repeat the intercept and slope
    // columns; the group fit must match a plain intercept-and-slope fit.
    for (std::uint32_t seed = 40; seed < 60; ++seed) {
      const Dataset d = fixtures::ancova(seed, 4, 5, 2.5);
      const ModelSpec spec{Layout::ancova, 8, GroupingScheme::parse(4, "1,3:2,4")};
      const SufficientStats s = sufficient_stats(build_model_matrix(d, spec), fixtures::response(d));
      for (int g = 0; g < 2; ++g) {
        std::vector<double> ys, xs;
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (spec.scheme->group_of(d.level[i]) == g) {
            ys.push_back(d.y[i]);
            xs.push_back((*d.covariate)[i]);
          }
        }
        Eigen::MatrixXd x(static_cast<Eigen::Index>(ys.size()), 2);
        Eigen::VectorXd y(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          x(i, 0) = 1.0;
          x(i, 1) = xs[static_cast<std::size_t>(i)];
          y(i) = ys[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
        const double ssr = (y - x * beta).squaredNorm();
        CHECK((g == 0 ? s.ss_resid1 : s.ss_resid2) == doctest::Approx(ssr).epsilon(1e-10));
      }
    }
  }
}
