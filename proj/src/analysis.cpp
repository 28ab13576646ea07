#include "slgf/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "slgf/error.hpp"
#include "slgf/marginal_gprior.hpp"
#include "slgf/schemes.hpp"

namespace slgf {
namespace {

bool recoverable(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::numerical:
    case ErrorCategory::degenerate_fit:
    case ErrorCategory::insufficient_data:
    case ErrorCategory::approximation_failure:
    case ErrorCategory::non_convergence:
    case ErrorCategory::evaluation:
      return true;
    default:
      return false;
  }
}

std::vector<int> resolve_classes(Layout layout, bool has_covariate, const std::vector<int>& requested) {
  if (requested.empty()) return available_classes(layout, has_covariate);
  std::vector<int> out = requested;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (int c : out) {
    if (c < 1 || c > class_count(layout)) {
      fail(ErrorCategory::configuration, "class " + std::to_string(c) + " is not defined for the " +
                                             std::string(to_string(layout)) + " layout");
    }
    if (uses_covariate(layout, c) && !has_covariate) {
      fail(ErrorCategory::configuration, "class " + class_name(c) + " needs a continuous covariate");
    }
  }
  return out;
}

template <typename Data>
PosteriorTable run_analysis(const Data& data, Layout layout, int levels, bool has_covariate,
                            const Eigen::VectorXd& y, const AnalysisOptions& options) {
  const PriorSystem prior = options.prior.value_or(default_prior(layout));
  const int min_size = options.min_group_size.value_or(default_min_group_size(layout));
  const std::vector<ModelSpec> models =
      enumerate_models(layout, levels, resolve_classes(layout, has_covariate, options.classes), min_size);
  const std::vector<double> priors = model_priors(models);

  // One exponent for the whole candidate set, sized for the most demanding
  // feasible model. With model-specific b the Bayes factors would change
  // with the units of y.
  std::vector<int> own_m0(models.size(), 0);
  parallel_for(models.size(), options.threads, [&](std::size_t i) {
    try {
      const DesignMatrices dm = build_model_matrix(data, models[i]);
      own_m0[i] = fbf_exponent(models[i], prior, dm.observations(), dm.columns()).m0;
    } catch (const Error& err) {
      if (!recoverable(err.category())) throw;
    }
  });
  const int common_m0 = *std::max_element(own_m0.begin(), own_m0.end());

  std::vector<PosteriorEntry> entries(models.size());
  parallel_for(models.size(), options.threads, [&](std::size_t i) {
    PosteriorEntry& e = entries[i];
    e.spec = models[i];
    e.scheme_label = e.spec.scheme ? scheme_label(*e.spec.scheme) : "-";
    e.prior = priors[i];
    try {
      const DesignMatrices dm = build_model_matrix(data, e.spec);
      FractionalConfig cfg = fbf_exponent(e.spec, prior, dm.observations(), dm.columns());
      cfg.m0 = common_m0;
      cfg.b = options.b_override.value_or(static_cast<double>(common_m0) / static_cast<double>(dm.observations()));
      e.log_q = log_fractional_marginal(dm, y, e.spec, prior, cfg);
      if (!std::isfinite(e.log_q)) {
        e.log_q = -std::numeric_limits<double>::infinity();
        e.warnings.push_back("evaluation: fractional marginal likelihood is not finite");
      }
    } catch (const Error& err) {
      if (!recoverable(err.category())) throw;
      e.log_q = -std::numeric_limits<double>::infinity();
      e.warnings.push_back(std::string(to_string(err.category())) + ": " + err.what());
    }
  });
  return posterior_probs(std::move(entries), layout);
}

}  // namespace

PriorSystem default_prior(Layout layout) {
  return layout == Layout::ancova ? PriorSystem::flat : PriorSystem::gprior;
}

std::vector<int> available_classes(Layout layout, bool has_covariate) {
  std::vector<int> out;
  for (int c = 1; c <= class_count(layout); ++c) {
    if (!uses_covariate(layout, c) || has_covariate) out.push_back(c);
  }
  return out;
}

std::vector<ModelSpec> enumerate_models(Layout layout, int levels, const std::vector<int>& classes,
                                        int min_group_size) {
  std::vector<ModelSpec> models;
  std::vector<GroupingScheme> schemes;
  bool have_schemes = false;
  for (int c : classes) {
    if (!is_scheme_indexed(layout, c)) {
      models.push_back({layout, c, std::nullopt});
      continue;
    }
    if (!have_schemes) {
      schemes = enumerate_schemes(levels, min_group_size);
      have_schemes = true;
    }
    if (schemes.empty()) {
      fail(ErrorCategory::configuration,
           "class " + class_name(c) + " has no grouping schemes with " + std::to_string(levels) +
               " levels and minimum group size " + std::to_string(min_group_size));
    }
    for (const auto& s : schemes) models.push_back({layout, c, s});
  }
  if (models.empty()) fail(ErrorCategory::configuration, "no model classes selected");
  return models;
}

double log_fractional_marginal(const DesignMatrices& dm, const Eigen::VectorXd& y, const ModelSpec& spec,
                               PriorSystem prior, const FractionalConfig& cfg) {
  if (prior == PriorSystem::flat) {
    const SufficientStats stats = sufficient_stats(dm, y);
    if (!spec.heteroscedastic()) return logq_flat_homoscedastic(stats, cfg);
    if (stats.separable) return logq_flat_hetero_separable(stats, cfg);
    return logq_flat_hetero_laplace(dm, y, cfg);
  }
  if (!spec.heteroscedastic()) return logq_gprior_homoscedastic(sufficient_stats(dm, y), cfg);
  return logq_gprior_hetero(dm, y, cfg);
}

PosteriorTable analyze(const Dataset& data, const AnalysisOptions& options) {
  validate(data);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.y.data(), static_cast<Eigen::Index>(data.y.size()));
  return run_analysis(data, Layout::ancova, data.levels(), data.has_covariate(), y, options);
}

PosteriorTable analyze(const TwoWayLayout& layout, const AnalysisOptions& options) {
  validate(layout);
  return run_analysis(layout, Layout::twoway, layout.rows(), false, layout.response(), options);
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

unsigned default_threads() {
  if (const char* env = std::getenv("SLGF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

}  // namespace slgf
