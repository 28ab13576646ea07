#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slgf/analysis.hpp"
#include "slgf/data.hpp"
#include "slgf/error.hpp"
#include "slgf/report.hpp"
#include "slgf/simulate.hpp"

namespace {

using slgf::ErrorCategory;
using slgf::fail;

struct Common {
  std::string data;
  std::string prior;
  std::vector<std::string> classes;
  std::optional<int> min_group_size;
  std::optional<double> b;
  std::string format = "json";
  std::string out;
  unsigned threads = slgf::default_threads();
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--data", c.data, "CSV path, or builtin:<name> for embedded data")->required();
  cmd->add_option("--prior", c.prior, "flat or gprior (default: flat for ancova, gprior for twoway)")
      ->check(CLI::IsMember({"flat", "gprior"}));
  cmd->add_option("--classes", c.classes, "model classes to include, e.g. I,III,VII")->delimiter(',');
  cmd->add_option("--min-group-size", c.min_group_size, "minimum SLGF levels per latent group");
  cmd->add_option("--b", c.b, "fractional exponent override (experimental)");
  cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--threads", c.threads, "worker threads (default: SLGF_THREADS or 1)");
}

slgf::AnalysisOptions options_from(const Common& c) {
  slgf::AnalysisOptions o;
  if (!c.prior.empty()) o.prior = c.prior == "flat" ? slgf::PriorSystem::flat : slgf::PriorSystem::gprior;
  for (const auto& s : c.classes) o.classes.push_back(slgf::parse_class(s));
  o.min_group_size = c.min_group_size;
  if (c.min_group_size && *c.min_group_size < 1) fail(ErrorCategory::configuration, "--min-group-size must be positive");
  if (c.b && !(*c.b > 0.0 && *c.b <= 1.0)) fail(ErrorCategory::configuration, "--b must lie in (0, 1]");
  o.b_override = c.b;
  o.threads = c.threads == 0 ? 1 : c.threads;
  return o;
}

// Opened before the analysis so an unwritable path fails fast.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) fail(ErrorCategory::configuration, "cannot write to '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void emit(const slgf::PosteriorTable& table, const Common& c, const std::string& command) {
  Output out(c.out);
  const slgf::PriorSystem prior = c.prior.empty() ? slgf::default_prior(table.layout)
                                 : c.prior == "flat" ? slgf::PriorSystem::flat
                                                     : slgf::PriorSystem::gprior;
  const slgf::ReportMeta meta{command, prior, c.b, c.data};
  if (c.format == "csv") {
    slgf::write_csv(table, out.stream());
  } else {
    slgf::write_json(table, meta, out.stream());
  }
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::configuration:
    case ErrorCategory::parse:
    case ErrorCategory::validation:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent grouping factor detection by fractional Bayes factors"};
  app.require_subcommand(1);

  Common anc;
  std::string response = "y", slgf_col = "group";
  std::optional<std::string> covariate;
  auto* ancova = app.add_subcommand("analyze-ancova", "ANCOVA or one-way data in long CSV format");
  add_common(ancova, anc);
  ancova->add_option("--response", response, "response column");
  ancova->add_option("--slgf", slgf_col, "column holding the suspected latent grouping factor");
  ancova->add_option("--covariate", covariate, "continuous covariate column");

  Common tw;
  std::string orientation = "rows";
  bool long_format = false;
  std::string tw_response = "y", row_col = "row", col_col = "col";
  auto* twoway = app.add_subcommand("analyze-twoway", "unreplicated two-way layout");
  add_common(twoway, tw);
  twoway->add_option("--slgf", orientation, "which margin is the SLGF: rows or cols")
      ->check(CLI::IsMember({"rows", "cols"}));
  twoway->add_flag("--long", long_format, "data is long format (response,row,col columns)");
  twoway->add_option("--response", tw_response, "response column for --long");
  twoway->add_option("--row-col", row_col, "row label column for --long");
  twoway->add_option("--col-col", col_col, "column label column for --long");

  std::string layout = "ancova", preset_name, true_class = "I", sim_out, meta_out;
  int reps = 100;
  std::uint64_t seed = 1;
  unsigned sim_threads = slgf::default_threads();
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study; writes a per-class summary CSV");
  simulate->add_option("--layout", layout, "ancova or twoway")->check(CLI::IsMember({"ancova", "twoway"}));
  simulate->add_option("--preset", preset_name, "settings: " + [] {
    std::string s;
    for (const auto& n : slgf::preset_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }());
  simulate->add_option("--true-class", true_class, "generating class");
  simulate->add_option("--reps", reps, "replicates");
  simulate->add_option("--seed", seed, "64-bit seed");
  simulate->add_option("--threads", sim_threads, "worker threads (default: SLGF_THREADS or 1)");
  simulate->add_option("--out", sim_out, "summary CSV path (default: stdout)");
  simulate->add_option("--meta", meta_out, "JSON file for the generating scheme and failures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << slgf::error_json(ErrorCategory::configuration, e.what()).dump() << '\n';
    return 2;
  }

  try {
    if (*ancova) {
      const slgf::Dataset data = slgf::load_ancova_csv(anc.data, response, slgf_col, covariate);
      emit(slgf::analyze(data, options_from(anc)), anc, "analyze-ancova");
    } else if (*twoway) {
      slgf::TwoWayLayout data;
      if (tw.data.starts_with("builtin:")) {
        data = slgf::builtin_layout(tw.data);
      } else if (long_format) {
        std::ifstream in(tw.data);
        if (!in) fail(ErrorCategory::parse, "cannot open '" + tw.data + "'");
        data = slgf::read_twoway_long_csv(in, tw_response, row_col, col_col);
      } else {
        data = slgf::load_twoway_csv(tw.data);
      }
      if (orientation == "cols") data = slgf::transpose_layout(data);
      emit(slgf::analyze(data, options_from(tw)), tw, "analyze-twoway");
    } else if (*simulate) {
      const slgf::Layout lay = layout == "ancova" ? slgf::Layout::ancova : slgf::Layout::twoway;
      if (preset_name.empty()) preset_name = lay == slgf::Layout::ancova ? "ancova-90" : "twoway-10x5-large";
      slgf::StudyConfig cfg = slgf::preset(preset_name, slgf::parse_class(true_class));
      if (cfg.layout != lay) fail(ErrorCategory::configuration, "preset '" + preset_name + "' is for the other layout");
      cfg.replicates = reps;
      cfg.seed = seed;
      cfg.threads = sim_threads == 0 ? 1 : sim_threads;
      Output out(sim_out);
      std::optional<Output> meta;
      if (!meta_out.empty()) meta.emplace(meta_out);
      const slgf::StudySummary summary = slgf::run_study(cfg);
      slgf::write_study_csv(summary, out.stream());
      for (const auto& f : summary.failures) std::cerr << "warning: " << f << '\n';
      if (meta) {
        meta->stream() << nlohmann::json{{"preset", preset_name},
                                         {"true_class", slgf::class_name(cfg.true_class)},
                                         {"replicates", cfg.replicates},
                                         {"seed", cfg.seed},
                                         {"generating_scheme", summary.generating_scheme},
                                         {"tables", summary.tables},
                                         {"failures", summary.failures}}
                                  .dump(2)
                       << '\n';
      }
    }
  } catch (const slgf::Error& e) {
    std::cout << slgf::error_json(e.category(), e.what()).dump() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cout << slgf::error_json(ErrorCategory::evaluation, e.what()).dump() << '\n';
    return 1;
  }
  return 0;
}
