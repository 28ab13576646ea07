#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "slgf/data.hpp"
#include "slgf/design.hpp"
#include "slgf/marginal_flat.hpp"
#include "slgf/posterior.hpp"

namespace slgf {

struct AnalysisOptions {
  std::optional<PriorSystem> prior;  // flat for ancova, g-prior for two-way
  std::vector<int> classes;          // empty selects every available class
  std::optional<int> min_group_size;
  std::optional<double> b_override;  // experimental
  unsigned threads = 1;
};

PriorSystem default_prior(Layout layout);

/// Classes available for the data: without a covariate the ANCOVA set
/// reduces to the one-way classes I, III, IV and VII.
std::vector<int> available_classes(Layout layout, bool has_covariate);

/// Every (class, scheme) pair in class order, schemes in enumeration order.
/// Throws configuration when a requested scheme-indexed class has no schemes.
std::vector<ModelSpec> enumerate_models(Layout layout, int levels, const std::vector<int>& classes,
                                        int min_group_size);

/// Routes a model to its closed form or Laplace path.
double log_fractional_marginal(const DesignMatrices& dm, const Eigen::VectorXd& y, const ModelSpec& spec,
                               PriorSystem prior, const FractionalConfig& cfg);

PosteriorTable analyze(const Dataset& data, const AnalysisOptions& options);
PosteriorTable analyze(const TwoWayLayout& layout, const AnalysisOptions& options);

/// Runs fn(0..n-1) on up to `threads` workers. The first exception by index
/// is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// SLGF_THREADS when set to a positive integer, otherwise 1.
unsigned default_threads();

}  // namespace slgf
