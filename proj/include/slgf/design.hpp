#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slgf/data.hpp"
#include "slgf/schemes.hpp"

namespace slgf {

enum class Layout { ancova, twoway };
enum class PriorSystem { flat, gprior };

std::string_view to_string(Layout layout);
std::string_view to_string(PriorSystem prior);

/// Model classes are numbered 1..8 (ANCOVA) or 1..4 (two-way), matching the
/// roman numerals used in reports.
std::string class_name(int model_class);
int parse_class(std::string_view text);
int class_count(Layout layout);
bool is_scheme_indexed(Layout layout, int model_class);
bool is_heteroscedastic(Layout layout, int model_class);
/// Classes whose design uses the continuous covariate (ANCOVA II, V, VI, VIII).
bool uses_covariate(Layout layout, int model_class);
/// Default minimum number of SLGF levels per group.
int default_min_group_size(Layout layout);

struct ModelSpec {
  Layout layout = Layout::ancova;
  int model_class = 1;
  std::optional<GroupingScheme> scheme;

  bool heteroscedastic() const { return is_heteroscedastic(layout, model_class); }
};

void validate(const ModelSpec& spec);

enum class Block { intercept, level_effects, covariate_effects, interactions };
std::string_view to_string(Block block);

struct ColumnBlock {
  Block block;
  Eigen::Index begin = 0;
  Eigen::Index count = 0;
};

/// X = (1 | W | V | U) with treatment coding. When the spec has a scheme, the
/// rows are ordered group-1-first; row i of x is observation row_order[i].
struct DesignMatrices {
  Eigen::MatrixXd x;
  std::vector<ColumnBlock> column_blocks;
  std::vector<std::size_t> row_order;
  std::optional<std::pair<Eigen::Index, Eigen::Index>> group_split;

  Eigen::Index observations() const noexcept { return x.rows(); }
  Eigen::Index columns() const noexcept { return x.cols(); }
  /// Reorders a response given in observation order into design row order.
  Eigen::VectorXd gather(const Eigen::VectorXd& y) const;
};

DesignMatrices build_model_matrix(const Dataset& data, const ModelSpec& spec);
DesignMatrices build_model_matrix(const TwoWayLayout& layout, const ModelSpec& spec);

struct SufficientStats {
  Eigen::Index N = 0, n1 = 0, n2 = 0;
  Eigen::Index P = 0, p1 = 0, p2 = 0;
  double ss_resid = 0.0;
  double ss_resid1 = 0.0;
  double ss_resid2 = 0.0;
  double sst = 0.0;
  double r_squared = 0.0;
  double q = 1.0;
  bool grouped = false;
  /// Column span splits into independent per-group spans (p1 + p2 == P),
  /// so no parameter is shared across the two variance blocks.
  bool separable = false;
};

/// Least-squares summaries via column-pivoted QR. `y` is in observation order.
SufficientStats sufficient_stats(const DesignMatrices& dm, const Eigen::VectorXd& y);

/// Numerical rank with singular values above 1e-10 * sigma_max.
Eigen::Index numerical_rank(const Eigen::MatrixXd& m);

}  // namespace slgf
