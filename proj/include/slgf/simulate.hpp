#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "slgf/analysis.hpp"
#include "slgf/data.hpp"
#include "slgf/design.hpp"
#include "slgf/schemes.hpp"

namespace slgf {

/// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter block(Counter counter, Key key);
};

/// Draws for one (seed, replicate, stream) triple. The replicate and stream
/// occupy their own counter words, so streams never overlap.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t replicate, std::uint32_t stream);

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Generating parameters. ANCOVA: nu holds the K-1 level effects (III, V) or
/// the single group-2 effect (IV, VI, VII, VIII); tau[0] is the common slope;
/// rho holds per-level slope offsets (V, K entries) or per-group offsets
/// (VI, VIII, 2 entries). Two-way: nu holds row effects (R-1 entries with
/// the first row at 0, or R entries); tau holds column effects, and tau2 the
/// group-2 column effects for classes II and IV. sigma2 has one entry, or
/// one per group for heteroscedastic classes.
struct ModelParams {
  double alpha = 0.0;
  std::vector<double> nu;
  std::vector<double> tau;
  std::vector<double> tau2;
  std::vector<double> rho;
  std::vector<double> sigma2{1.0};
};

struct StudyConfig {
  Layout layout = Layout::ancova;
  int true_class = 1;
  ModelParams params;
  int replicates = 100;
  int levels = 4;        // ancova
  int n_per_level = 90;  // ancova
  int rows = 10;         // two-way
  int cols = 5;          // two-way
  std::uint64_t seed = 1;
  unsigned threads = 1;
  AnalysisOptions analysis;  // per replicate; threads there are ignored
};

/// Named settings: ancova-90, ancova-10, twoway-10x5-large,
/// twoway-10x5-small, twoway-5x5-large, twoway-5x5-small.
StudyConfig preset(std::string_view name, int true_class);
std::vector<std::string> preset_names();

/// Levels {1,2}:{3,4} style balanced split for ANCOVA, first half of the
/// rows against the second half for two-way layouts.
GroupingScheme generating_scheme(const StudyConfig& cfg);

void validate(const StudyConfig& cfg);
Dataset simulate_ancova(const StudyConfig& cfg, std::uint32_t rep);
TwoWayLayout simulate_twoway(const StudyConfig& cfg, std::uint32_t rep);

struct ClassSummary {
  int model_class = 0;
  double q25 = 0.0, median = 0.0, q75 = 0.0;
  double argmax_fraction = 0.0;
};

struct StudySummary {
  std::vector<int> classes;
  /// class_posteriors[rep][j] is the aggregate posterior of classes[j].
  std::vector<std::vector<double>> class_posteriors;
  std::vector<int> argmax_class;  // 0 for failed replicates
  std::vector<std::string> failures;
  std::vector<ClassSummary> summary;
  std::string generating_scheme;
  std::size_t tables = 0;
};

StudySummary run_study(const StudyConfig& cfg);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double prob);

/// Columns: class, q25, median, q75, argmax_fraction.
void write_study_csv(const StudySummary& summary, std::ostream& out);

}  // namespace slgf
