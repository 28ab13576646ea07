#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace slgf {

/// Long-format observations: one response per row, the level of the
/// suspected latent grouping factor (SLGF), and an optional continuous
/// covariate. Levels are 0-based and numbered by first appearance.
struct Dataset {
  std::vector<double> y;
  std::vector<int> level;
  std::optional<std::vector<double>> covariate;
  std::vector<std::string> level_labels;

  std::string response_name = "y";
  std::string slgf_name = "level";
  std::string covariate_name = "x";

  std::size_t size() const noexcept { return y.size(); }
  int levels() const noexcept { return static_cast<int>(level_labels.size()); }
  bool has_covariate() const noexcept { return covariate.has_value(); }
};

/// Builds a dataset from raw labels, assigning level indices by first
/// appearance. Throws a validation error if the invariants do not hold.
Dataset make_dataset(std::vector<double> y, const std::vector<std::string>& labels,
                     std::optional<std::vector<double>> covariate = std::nullopt);

void validate(const Dataset& data);

Dataset load_ancova_csv(const std::filesystem::path& path, std::string_view response_col,
                        std::string_view slgf_col,
                        std::optional<std::string> covariate_col = std::nullopt);
Dataset read_ancova_csv(std::istream& in, std::string_view response_col,
                        std::string_view slgf_col,
                        std::optional<std::string> covariate_col = std::nullopt);
void write_ancova_csv(const Dataset& data, std::ostream& out);

/// Unreplicated R x C table. The rows are the SLGF unless the layout is
/// transposed first.
struct TwoWayLayout {
  Eigen::MatrixXd cells;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  int rows() const noexcept { return static_cast<int>(cells.rows()); }
  int cols() const noexcept { return static_cast<int>(cells.cols()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(cells.size()); }

  /// Observation n = r * C + c (row-major).
  double observation(std::size_t n) const {
    const auto c = static_cast<Eigen::Index>(cells.cols());
    return cells(static_cast<Eigen::Index>(n) / c, static_cast<Eigen::Index>(n) % c);
  }
  Eigen::VectorXd response() const;
};

void validate(const TwoWayLayout& layout);

/// Matrix format: first row holds column labels (first cell ignored), first
/// column holds row labels.
TwoWayLayout load_twoway_csv(const std::filesystem::path& path);
TwoWayLayout read_twoway_csv(std::istream& in);
void write_twoway_csv(const TwoWayLayout& layout, std::ostream& out);

/// Long format with one (row, col, response) triple per line. Duplicate
/// cells are rejected; the layout must be complete.
TwoWayLayout read_twoway_long_csv(std::istream& in, std::string_view response_col,
                                  std::string_view row_col, std::string_view col_col);

TwoWayLayout transpose_layout(const TwoWayLayout& layout);

/// Embedded case-study layouts, addressed as "dog-lymphoma" (with or without
/// a "builtin:" prefix).
TwoWayLayout builtin_layout(std::string_view name);
std::vector<std::string> builtin_layout_names();

}  // namespace slgf
