#pragma once

#include <map>
#include <string>
#include <vector>

#include "slgf/design.hpp"

namespace slgf {

struct PosteriorEntry {
  ModelSpec spec;
  std::string scheme_label;  // "-" for classes without a scheme
  double log_q = 0.0;
  double prior = 0.0;
  double posterior = 0.0;
  std::vector<std::string> warnings;
};

struct PosteriorTable {
  Layout layout = Layout::ancova;
  std::vector<PosteriorEntry> entries;  // sorted by posterior, descending
  std::map<int, double> class_aggregates;
  std::map<std::string, double> scheme_aggregates;

  const PosteriorEntry& top() const;
};

/// Uniform 1/C over the classes present, split evenly among each class's models.
std::vector<double> model_priors(const std::vector<ModelSpec>& models);

/// Normalizes exp(log_q) * prior in the log domain. Entries keep their
/// warnings; those with log_q = -inf get posterior 0. Throws no_valid_model
/// when nothing is finite.
PosteriorTable posterior_probs(std::vector<PosteriorEntry> entries, Layout layout);

enum class AggregateBy { model_class, scheme };
std::map<std::string, double> aggregate(const PosteriorTable& table, AggregateBy by);

double log_bayes_factor(const PosteriorEntry& m1, const PosteriorEntry& m2);
double bayes_factor(const PosteriorEntry& m1, const PosteriorEntry& m2);

}  // namespace slgf
