#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "slgf/analysis.hpp"
#include "slgf/error.hpp"

using namespace slgf;

namespace {

double total(const PosteriorTable& t) {
  return std::accumulate(t.entries.begin(), t.entries.end(), 0.0,
                         [](double s, const PosteriorEntry& e) { return s + e.posterior; });
}

std::string key(const PosteriorEntry& e) { return std::to_string(e.spec.model_class) + "/" + e.scheme_label; }

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("class sets and defaults") {
    CHECK(available_classes(Layout::ancova, true) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(available_classes(Layout::ancova, false) == std::vector<int>{1, 3, 4, 7});
    CHECK(available_classes(Layout::twoway, false) == std::vector<int>{1, 2, 3, 4});
    CHECK(default_prior(Layout::ancova) == PriorSystem::flat);
    CHECK(default_prior(Layout::twoway) == PriorSystem::gprior);
    CHECK(enumerate_models(Layout::twoway, 6, {1, 2, 3, 4}, 2).size() == 76);
    CHECK_THROWS_AS(enumerate_models(Layout::twoway, 3, {2}, 2), Error);
  }

  TEST_CASE("thread count does not change the table") {
    const Dataset d = fixtures::ancova(31, 4, 6, 2.0);
    AnalysisOptions one;
    AnalysisOptions four = one;
    four.threads = 4;
    const PosteriorTable a = analyze(d, one), b = analyze(d, four);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      CHECK(key(a.entries[i]) == key(b.entries[i]));
      CHECK(a.entries[i].posterior == b.entries[i].posterior);
    }
    CHECK(std::abs(total(a) - 1.0) <= 1e-12);
  }

  TEST_CASE("rescaling the response leaves every posterior unchanged") {
    const auto compare = [](const PosteriorTable& a, const PosteriorTable& b) {
      REQUIRE(a.entries.size() == b.entries.size());
      for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(key(a.entries[i]) == key(b.entries[i]));
        CHECK(std::abs(a.entries[i].posterior - b.entries[i].posterior) <= 1e-6);
      }
    };
    Dataset d = fixtures::ancova(33, 4, 6, 2.0);
    const PosteriorTable before = analyze(d, {});
    for (auto& v : d.y) v *= 40.0;
    compare(before, analyze(d, {}));

    TwoWayLayout t = fixtures::twoway(34, 4, 3, 1.5);
    const PosteriorTable tw_before = analyze(t, {});
    t.cells *= 0.05;
    compare(tw_before, analyze(t, {}));
  }

  TEST_CASE("relabeling levels permutes the table") {
    const Dataset d = fixtures::ancova(32, 4, 5, 2.5);
    // Reverse the level order of appearance: level k becomes 3 - k.
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return d.level[i] > d.level[j]; });
    std::vector<double> y, x;
    std::vector<std::string> labels;
    for (std::size_t i : order) {
      y.push_back(d.y[i]);
      x.push_back((*d.covariate)[i]);
      labels.push_back(d.level_labels[static_cast<std::size_t>(d.level[i])]);
    }
    const Dataset r = make_dataset(y, labels, x);
    const PosteriorTable a = analyze(d, {}), b = analyze(r, {});

    // Translate a scheme label of r into the levels of d.
    const auto translate = [&](const PosteriorEntry& e) {
      if (!e.spec.scheme) return key(e);
      std::vector<int> g1, g2;
      for (int lvl : e.spec.scheme->group1()) {
        g1.push_back(static_cast<int>(std::find(d.level_labels.begin(), d.level_labels.end(),
                                                r.level_labels[static_cast<std::size_t>(lvl)]) -
                                      d.level_labels.begin()));
      }
      for (int lvl : e.spec.scheme->group2()) {
        g2.push_back(static_cast<int>(std::find(d.level_labels.begin(), d.level_labels.end(),
                                                r.level_labels[static_cast<std::size_t>(lvl)]) -
                                      d.level_labels.begin()));
      }
      return std::to_string(e.spec.model_class) + "/" + scheme_label(GroupingScheme::from_groups(4, g1, g2));
    };
    std::map<std::string, double> pa, pb;
    for (const auto& e : a.entries) pa[key(e)] = e.posterior;
    for (const auto& e : b.entries) pb[translate(e)] = e.posterior;
    REQUIRE(pa.size() == pb.size());
    for (const auto& [k, v] : pa) {
      REQUIRE(pb.count(k) == 1);
      CHECK(std::abs(v - pb[k]) <= 1e-6);
    }
  }

  TEST_CASE("failing models are kept with a warning") {
    // Class VI needs a slope per group; make x constant in group 2 so every
    // scheme whose group 2 is {3,4} becomes rank deficient.
    Dataset d = fixtures::ancova(33, 4, 5);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.level[i] >= 2) (*d.covariate)[i] = 1.0;
    }
    AnalysisOptions opt;
    opt.classes = {1, 6};
    const PosteriorTable t = analyze(d, opt);
    bool saw = false;
    for (const auto& e : t.entries) {
      if (e.spec.model_class == 6 && e.scheme_label == "1,2:3,4") {
        saw = true;
        CHECK(std::isinf(e.log_q));
        CHECK(e.posterior == 0.0);
        REQUIRE(e.warnings.size() == 1);
        CHECK(e.warnings[0].rfind("numerical: ", 0) == 0);
        CHECK(e.warnings[0].find("interaction") != std::string::npos);
      }
    }
    CHECK(saw);
    CHECK(std::abs(total(t) - 1.0) <= 1e-12);
  }

  TEST_CASE("one-way data use the one-way classes") {
    Dataset d = fixtures::ancova(34, 4, 5, 3.0);
    d.covariate.reset();
    const PosteriorTable t = analyze(d, {});
    CHECK(t.class_aggregates.size() == 4);
    for (const auto& e : t.entries) CHECK(!uses_covariate(Layout::ancova, e.spec.model_class));
  }

  TEST_CASE("parallel_for runs every index and rethrows the first failure") {
    std::vector<int> hits(50, 0);
    parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    try {
      parallel_for(20, 4, [](std::size_t i) {
        if (i == 7 || i == 15) throw std::runtime_error("boom " + std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "boom 7");
    }
  }
}
