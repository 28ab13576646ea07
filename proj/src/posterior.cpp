#include "slgf/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slgf/error.hpp"

namespace slgf {

const PosteriorEntry& PosteriorTable::top() const {
  require(!entries.empty(), "posterior table is empty");
  return entries.front();
}

std::vector<double> model_priors(const std::vector<ModelSpec>& models) {
  require(!models.empty(), "no models to assign priors to");
  std::map<int, std::size_t> per_class;
  for (const auto& m : models) ++per_class[m.model_class];
  const auto C = static_cast<double>(per_class.size());
  std::vector<double> priors;
  priors.reserve(models.size());
  for (const auto& m : models) {
    priors.push_back(1.0 / (C * static_cast<double>(per_class[m.model_class])));
  }
  return priors;
}

PosteriorTable posterior_probs(std::vector<PosteriorEntry> entries, Layout layout) {
  double lmax = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries) {
    if (std::isfinite(e.log_q) && e.prior > 0.0) lmax = std::max(lmax, e.log_q);
  }
  if (!std::isfinite(lmax)) {
    fail(ErrorCategory::no_valid_model, "no model produced a finite fractional marginal likelihood");
  }
  double total = 0.0;
  for (auto& e : entries) {
    e.posterior = std::isfinite(e.log_q) ? std::exp(e.log_q - lmax) * e.prior : 0.0;
    total += e.posterior;
  }
  for (auto& e : entries) e.posterior /= total;

  std::stable_sort(entries.begin(), entries.end(), [](const PosteriorEntry& a, const PosteriorEntry& b) {
    if (a.posterior != b.posterior) return a.posterior > b.posterior;
    if (a.spec.model_class != b.spec.model_class) return a.spec.model_class < b.spec.model_class;
    return a.scheme_label < b.scheme_label;
  });

  PosteriorTable table;
  table.layout = layout;
  table.entries = std::move(entries);
  for (const auto& e : table.entries) {
    table.class_aggregates[e.spec.model_class] += e.posterior;
    if (e.spec.scheme) table.scheme_aggregates[e.scheme_label] += e.posterior;
  }
  return table;
}

std::map<std::string, double> aggregate(const PosteriorTable& table, AggregateBy by) {
  std::map<std::string, double> out;
  if (by == AggregateBy::model_class) {
    for (const auto& [c, p] : table.class_aggregates) out[class_name(c)] = p;
  } else {
    out.insert(table.scheme_aggregates.begin(), table.scheme_aggregates.end());
  }
  return out;
}

double log_bayes_factor(const PosteriorEntry& m1, const PosteriorEntry& m2) {
  if (!std::isfinite(m1.log_q) || !std::isfinite(m2.log_q)) {
    fail(ErrorCategory::undefined_bayes_factor, "Bayes factor needs two finite marginal likelihoods");
  }
  return m1.log_q - m2.log_q;
}

double bayes_factor(const PosteriorEntry& m1, const PosteriorEntry& m2) {
  return std::exp(log_bayes_factor(m1, m2));
}

}  // namespace slgf
