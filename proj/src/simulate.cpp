#include "slgf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

#include "slgf/error.hpp"

namespace slgf {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53U;
constexpr std::uint32_t kM1 = 0xCD9E8D57U;
constexpr std::uint32_t kW0 = 0x9E3779B9U;
constexpr std::uint32_t kW1 = 0xBB67AE85U;

std::vector<double> seq(double from, double step, int count) {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = from + step * i;
  return v;
}

std::vector<double> reversed(std::vector<double> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

ModelParams ancova_params(int c) {
  ModelParams p;
  p.tau = {0.5};
  switch (c) {
    case 1: p.tau.clear(); break;
    case 2: break;
    case 3: p.alpha = 2.0; p.nu = {4.0, 6.0, 8.0}; break;
    case 4: p.nu = {3.0}; break;
    case 5: p.alpha = 0.5; p.nu = {1.0, 1.5, 2.0}; p.rho = {0.25, 0.5, 0.75, 1.0}; break;
    case 6: p.nu = {0.8}; p.rho = {0.0, 1.0}; p.tau = {1.0}; break;
    case 7: p.nu = {3.0}; p.sigma2 = {1.0, 5.0}; break;
    case 8: p.nu = {3.0}; p.rho = {0.0, 1.0}; p.sigma2 = {1.0, 5.0}; break;
    default: fail(ErrorCategory::configuration, "ANCOVA class must be I..VIII");
  }
  return p;
}

ModelParams twoway_params(int c, std::vector<double> nu, std::vector<double> tau1, double sigma2_2) {
  ModelParams p;
  p.alpha = 1.0;
  p.nu = std::move(nu);
  if (c == 2 || c == 4) {
    p.tau = tau1;
    p.tau2 = reversed(tau1);
  } else {
    p.tau = seq(1.0, 1.0, 5);
  }
  if (c == 3 || c == 4) p.sigma2 = {1.0, sigma2_2};
  return p;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint32_t replicate, std::uint32_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0, 0, stream, replicate} {}

std::uint32_t RandomStream::next_u32() {
  if (used_ == 4) {
    buffer_ = Philox4x32::block(counter_, key_);
    if (++counter_[0] == 0) ++counter_[1];
    used_ = 0;
  }
  return buffer_[static_cast<std::size_t>(used_++)];
}

double RandomStream::uniform() {
  const std::uint64_t a = next_u32() >> 5;
  const std::uint64_t b = next_u32() >> 6;
  return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

StudyConfig preset(std::string_view name, int true_class) {
  StudyConfig cfg;
  cfg.true_class = true_class;
  if (name == "ancova-90" || name == "ancova-10") {
    cfg.layout = Layout::ancova;
    cfg.levels = 4;
    cfg.n_per_level = name == "ancova-90" ? 90 : 10;
    cfg.params = ancova_params(true_class);
    return cfg;
  }
  cfg.layout = Layout::twoway;
  if (true_class < 1 || true_class > 4) fail(ErrorCategory::configuration, "two-way class must be I..IV");
  if (name == "twoway-10x5-large") {
    cfg.params = twoway_params(true_class, seq(2.0, 1.0, 9), seq(1.0, 0.8, 5), 0.10);
  } else if (name == "twoway-10x5-small") {
    cfg.params = twoway_params(true_class, {1, 2, 3, 4, 5, 7, 8, 9, 10}, seq(1.0, 0.5, 5), 0.25);
  } else if (name == "twoway-5x5-large") {
    cfg.rows = 5;
    std::vector<double> nu = true_class == 1 ? seq(1.0, 0.5, 5) : seq(1.0, 1.0, 5);
    cfg.params = twoway_params(true_class, std::move(nu), seq(1.0, 0.8, 5), 0.25);
  } else if (name == "twoway-5x5-small") {
    cfg.rows = 5;
    cfg.params = twoway_params(true_class, seq(1.0, 1.0, 5), seq(1.0, 0.5, 5), 0.25);
  } else {
    fail(ErrorCategory::configuration, "unknown study preset '" + std::string(name) + "'");
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"ancova-90", "ancova-10", "twoway-10x5-large", "twoway-10x5-small", "twoway-5x5-large",
          "twoway-5x5-small"};
}

GroupingScheme generating_scheme(const StudyConfig& cfg) {
  const int k = cfg.layout == Layout::ancova ? cfg.levels : cfg.rows;
  std::uint64_t mask = 0;
  for (int level = k / 2; level < k; ++level) mask |= std::uint64_t{1} << level;
  return GroupingScheme::from_mask(k, mask);
}

void validate(const StudyConfig& cfg) {
  const auto& p = cfg.params;
  const auto bad = [](const std::string& msg) { fail(ErrorCategory::configuration, msg); };
  if (cfg.replicates < 1) bad("a study needs at least one replicate");
  for (double s : p.sigma2)
    if (!(s > 0.0)) bad("variances must be positive");
  const bool hetero = is_heteroscedastic(cfg.layout, cfg.true_class);
  if (p.sigma2.size() != (hetero ? 2u : 1u)) bad("variance count does not match the generating class");
  const int c = cfg.true_class;
  if (cfg.layout == Layout::ancova) {
    if (c < 1 || c > 8) bad("ANCOVA class must be I..VIII");
    if (cfg.levels < 2 || cfg.n_per_level < 1) bad("ANCOVA study needs at least two levels");
    const std::size_t K = static_cast<std::size_t>(cfg.levels);
    const std::size_t nu = (c == 3 || c == 5) ? K - 1 : (c == 4 || c >= 6 ? 1 : 0);
    const std::size_t rho = c == 5 ? K : (c == 6 || c == 8 ? 2 : 0);
    if (p.nu.size() != nu) bad("nu has " + std::to_string(p.nu.size()) + " entries, expected " + std::to_string(nu));
    if (p.rho.size() != rho) bad("rho has " + std::to_string(p.rho.size()) + " entries, expected " + std::to_string(rho));
    if (p.tau.size() != (c == 1 ? 0u : 1u)) bad("tau must hold one slope for classes II..VIII");
  } else {
    if (c < 1 || c > 4) bad("two-way class must be I..IV");
    if (cfg.rows < 4 || cfg.cols < 2) bad("two-way study needs at least 4 rows and 2 columns");
    const auto R = static_cast<std::size_t>(cfg.rows), C = static_cast<std::size_t>(cfg.cols);
    if (p.nu.size() != R && p.nu.size() != R - 1) bad("nu needs R or R-1 row effects");
    if (p.tau.size() != C) bad("tau needs one effect per column");
    if ((c == 2 || c == 4) != (p.tau2.size() == C)) bad("tau2 is required exactly for classes II and IV");
  }
}

Dataset simulate_ancova(const StudyConfig& cfg, std::uint32_t rep) {
  require(cfg.layout == Layout::ancova, "simulate_ancova needs an ANCOVA study");
  validate(cfg);
  const auto& p = cfg.params;
  const GroupingScheme scheme = generating_scheme(cfg);
  const int c = cfg.true_class;
  RandomStream xs(cfg.seed, rep, 0);
  RandomStream es(cfg.seed, rep, 1);

  std::vector<double> y, x;
  std::vector<std::string> labels;
  for (int k = 0; k < cfg.levels; ++k) {
    const int g = scheme.group_of(k);
    for (int i = 0; i < cfg.n_per_level; ++i) {
      const double xi = 10.0 * xs.uniform();
      double mean = p.alpha;
      if ((c == 3 || c == 5) && k > 0) mean += p.nu[static_cast<std::size_t>(k - 1)];
      if ((c == 4 || c >= 6) && g == 1) mean += p.nu[0];
      if (c >= 2) {
        double slope = p.tau[0];
        if (c == 5) slope += p.rho[static_cast<std::size_t>(k)];
        if (c == 6 || c == 8) slope += p.rho[static_cast<std::size_t>(g)];
        mean += slope * xi;
      }
      const double var = p.sigma2.size() == 2 ? p.sigma2[static_cast<std::size_t>(g)] : p.sigma2[0];
      y.push_back(mean + std::sqrt(var) * es.normal());
      x.push_back(xi);
      labels.push_back(std::to_string(k + 1));
    }
  }
  return make_dataset(std::move(y), labels, std::move(x));
}

TwoWayLayout simulate_twoway(const StudyConfig& cfg, std::uint32_t rep) {
  require(cfg.layout == Layout::twoway, "simulate_twoway needs a two-way study");
  validate(cfg);
  const auto& p = cfg.params;
  const GroupingScheme scheme = generating_scheme(cfg);
  RandomStream es(cfg.seed, rep, 1);
  TwoWayLayout out;
  out.cells.resize(cfg.rows, cfg.cols);
  const bool offset = p.nu.size() == static_cast<std::size_t>(cfg.rows - 1);
  for (int r = 0; r < cfg.rows; ++r) {
    out.row_labels.push_back("r" + std::to_string(r + 1));
    const int g = scheme.group_of(r);
    const double nu = offset ? (r == 0 ? 0.0 : p.nu[static_cast<std::size_t>(r - 1)]) : p.nu[static_cast<std::size_t>(r)];
    const double sd = std::sqrt(p.sigma2.size() == 2 ? p.sigma2[static_cast<std::size_t>(g)] : p.sigma2[0]);
    for (int col = 0; col < cfg.cols; ++col) {
      const auto& tau = (g == 1 && !p.tau2.empty()) ? p.tau2 : p.tau;
      out.cells(r, col) = p.alpha + nu + tau[static_cast<std::size_t>(col)] + sd * es.normal();
    }
  }
  for (int col = 0; col < cfg.cols; ++col) out.col_labels.push_back("c" + std::to_string(col + 1));
  return out;
}

double quantile(std::vector<double> values, double prob) {
  require(!values.empty(), "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

StudySummary run_study(const StudyConfig& cfg) {
  validate(cfg);
  StudySummary out;
  out.generating_scheme = scheme_label(generating_scheme(cfg));
  const bool covariate = cfg.layout == Layout::ancova;
  out.classes = cfg.analysis.classes.empty() ? available_classes(cfg.layout, covariate) : cfg.analysis.classes;
  std::sort(out.classes.begin(), out.classes.end());

  const auto reps = static_cast<std::size_t>(cfg.replicates);
  out.class_posteriors.assign(reps, std::vector<double>(out.classes.size(), 0.0));
  out.argmax_class.assign(reps, 0);
  std::vector<std::string> errors(reps);

  AnalysisOptions options = cfg.analysis;
  options.threads = 1;
  options.classes = out.classes;
  parallel_for(reps, cfg.threads, [&](std::size_t rep) {
    try {
      const auto r = static_cast<std::uint32_t>(rep);
      const PosteriorTable table = cfg.layout == Layout::ancova ? analyze(simulate_ancova(cfg, r), options)
                                                                : analyze(simulate_twoway(cfg, r), options);
      double best = -1.0;
      for (std::size_t j = 0; j < out.classes.size(); ++j) {
        const auto it = table.class_aggregates.find(out.classes[j]);
        const double v = it == table.class_aggregates.end() ? 0.0 : it->second;
        out.class_posteriors[rep][j] = v;
        if (v > best) {
          best = v;
          out.argmax_class[rep] = out.classes[j];
        }
      }
    } catch (const Error& e) {
      errors[rep] = "replicate " + std::to_string(rep) + ": " + std::string(to_string(e.category())) + ": " + e.what();
    }
  });

  std::size_t ok = 0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (errors[rep].empty()) {
      ++ok;
    } else {
      out.failures.push_back(errors[rep]);
    }
  }
  out.tables = ok;
  for (std::size_t j = 0; j < out.classes.size(); ++j) {
    ClassSummary s;
    s.model_class = out.classes[j];
    std::vector<double> v;
    std::size_t wins = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      if (!errors[rep].empty()) continue;
      v.push_back(out.class_posteriors[rep][j]);
      if (out.argmax_class[rep] == s.model_class) ++wins;
    }
    if (!v.empty()) {
      s.q25 = quantile(v, 0.25);
      s.median = quantile(v, 0.5);
      s.q75 = quantile(v, 0.75);
      s.argmax_fraction = static_cast<double>(wins) / static_cast<double>(v.size());
    }
    out.summary.push_back(s);
  }
  return out;
}

void write_study_csv(const StudySummary& summary, std::ostream& out) {
  const auto old = out.precision(12);
  out << "class,q25,median,q75,argmax_fraction\n";
  for (const auto& s : summary.summary) {
    out << class_name(s.model_class) << ',' << s.q25 << ',' << s.median << ',' << s.q75 << ','
        << s.argmax_fraction << '\n';
  }
  out.precision(old);
}

}  // namespace slgf
