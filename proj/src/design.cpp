#include "slgf/design.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "slgf/error.hpp"

namespace slgf {
namespace {

constexpr std::array<std::string_view, 8> kRoman = {"I", "II", "III", "IV", "V", "VI", "VII", "VIII"};

// Appends blocks one at a time so a rank failure can name the block that
// introduced it.
class DesignBuilder {
 public:
  explicit DesignBuilder(Eigen::Index rows) : rows_(rows) {}

  void add(Block block, const Eigen::MatrixXd& cols) {
    if (cols.cols() == 0) return;
    blocks_.push_back({block, total_, cols.cols()});
    parts_.push_back(cols);
    total_ += cols.cols();
  }

  DesignMatrices finish(std::vector<std::size_t> row_order,
                        std::optional<std::pair<Eigen::Index, Eigen::Index>> split) {
    DesignMatrices dm;
    dm.x.resize(rows_, total_);
    for (std::size_t b = 0; b < parts_.size(); ++b) {
      dm.x.middleCols(blocks_[b].begin, blocks_[b].count) = parts_[b];
    }
    if (numerical_rank(dm.x) < total_) {
      for (const auto& blk : blocks_) {
        const auto upto = blk.begin + blk.count;
        if (numerical_rank(dm.x.leftCols(upto)) < upto) {
          fail(ErrorCategory::numerical, "model matrix is rank deficient after adding the " +
                                             std::string(to_string(blk.block)) + " block");
        }
      }
    }
    dm.column_blocks = blocks_;
    dm.row_order = std::move(row_order);
    dm.group_split = split;
    return dm;
  }

 private:
  Eigen::Index rows_;
  Eigen::Index total_ = 0;
  std::vector<ColumnBlock> blocks_;
  std::vector<Eigen::MatrixXd> parts_;
};

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

std::vector<std::size_t> concat(const Partition& part) {
  std::vector<std::size_t> order = part.indices1;
  order.insert(order.end(), part.indices2.begin(), part.indices2.end());
  return order;
}

}  // namespace

std::string_view to_string(Layout layout) {
  return layout == Layout::ancova ? "ancova" : "twoway";
}

std::string_view to_string(PriorSystem prior) {
  return prior == PriorSystem::flat ? "flat" : "gprior";
}

std::string_view to_string(Block block) {
  switch (block) {
    case Block::intercept: return "intercept";
    case Block::level_effects: return "level-effect (W)";
    case Block::covariate_effects: return "covariate/column-effect (V)";
    case Block::interactions: return "interaction (U)";
  }
  return "unknown";
}

std::string class_name(int model_class) {
  require(model_class >= 1 && model_class <= 8, "model class out of range");
  return std::string(kRoman[static_cast<std::size_t>(model_class - 1)]);
}

int parse_class(std::string_view text) {
  for (std::size_t i = 0; i < kRoman.size(); ++i) {
    if (text == kRoman[i]) return static_cast<int>(i) + 1;
  }
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '8') return text[0] - '0';
  fail(ErrorCategory::configuration, "unknown model class '" + std::string(text) + "'");
}

int class_count(Layout layout) { return layout == Layout::ancova ? 8 : 4; }

bool is_scheme_indexed(Layout layout, int model_class) {
  if (layout == Layout::ancova) return model_class == 4 || model_class >= 6;
  return model_class >= 2;
}

bool is_heteroscedastic(Layout layout, int model_class) {
  if (layout == Layout::ancova) return model_class == 7 || model_class == 8;
  return model_class == 3 || model_class == 4;
}

bool uses_covariate(Layout layout, int model_class) {
  return layout == Layout::ancova &&
         (model_class == 2 || model_class == 5 || model_class == 6 || model_class == 8);
}

int default_min_group_size(Layout layout) { return layout == Layout::ancova ? 1 : 2; }

void validate(const ModelSpec& spec) {
  if (spec.model_class < 1 || spec.model_class > class_count(spec.layout)) {
    fail(ErrorCategory::contract_violation,
         "class " + std::to_string(spec.model_class) + " is not defined for the " +
             std::string(to_string(spec.layout)) + " layout");
  }
  if (is_scheme_indexed(spec.layout, spec.model_class) != spec.scheme.has_value()) {
    fail(ErrorCategory::contract_violation,
         "class " + class_name(spec.model_class) +
             (spec.scheme ? " takes no grouping scheme" : " requires a grouping scheme"));
  }
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double tol = 1e-10 * s(0);
  return (s.array() > tol).count();
}

Eigen::VectorXd DesignMatrices::gather(const Eigen::VectorXd& y) const {
  require(static_cast<std::size_t>(y.size()) == row_order.size(),
          "response length differs from the design");
  Eigen::VectorXd out(y.size());
  for (std::size_t i = 0; i < row_order.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(row_order[i]));
  }
  return out;
}

DesignMatrices build_model_matrix(const Dataset& data, const ModelSpec& spec) {
  validate(spec);
  require(spec.layout == Layout::ancova, "dataset requires an ANCOVA model spec");
  if (uses_covariate(spec.layout, spec.model_class) && !data.has_covariate()) {
    fail(ErrorCategory::configuration,
         "class " + class_name(spec.model_class) + " needs a continuous covariate");
  }
  const int K = data.levels();
  std::vector<std::size_t> order = identity_order(data.size());
  std::optional<std::pair<Eigen::Index, Eigen::Index>> split;
  if (spec.scheme) {
    require(spec.scheme->levels() == K, "scheme level count differs from the dataset's");
    const Partition part = partition_dataset(data, *spec.scheme);
    order = concat(part);
    split = std::pair{static_cast<Eigen::Index>(part.n1()), static_cast<Eigen::Index>(part.n2())};
  }

  const auto N = static_cast<Eigen::Index>(data.size());
  const bool has_x = data.has_covariate();
  const int c = spec.model_class;
  const bool level_effects = c == 3 || c == 5;
  const bool group_effects = c == 4 || c == 6 || c == 7 || c == 8;
  const bool slope = has_x && c != 1;
  const bool level_slopes = has_x && c == 5;
  const bool group_slopes = has_x && (c == 6 || c == 8);

  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(N, 1);
  Eigen::MatrixXd w(N, level_effects ? K - 1 : (group_effects ? 1 : 0));
  Eigen::MatrixXd v(N, slope ? 1 : 0);
  Eigen::MatrixXd u(N, level_slopes ? K - 1 : (group_slopes ? 1 : 0));
  w.setZero();
  u.setZero();
  for (Eigen::Index i = 0; i < N; ++i) {
    const std::size_t obs = order[static_cast<std::size_t>(i)];
    const int k = data.level[obs];
    const double x = has_x ? (*data.covariate)[obs] : 0.0;
    if (slope) v(i, 0) = x;
    if (level_effects && k > 0) w(i, k - 1) = 1.0;
    if (level_slopes && k > 0) u(i, k - 1) = x;
    if (group_effects && spec.scheme->in_group2(k)) w(i, 0) = 1.0;
    if (group_slopes && spec.scheme->in_group2(k)) u(i, 0) = x;
  }

  DesignBuilder builder(N);
  builder.add(Block::intercept, ones);
  builder.add(Block::level_effects, w);
  builder.add(Block::covariate_effects, v);
  builder.add(Block::interactions, u);
  return builder.finish(std::move(order), split);
}

DesignMatrices build_model_matrix(const TwoWayLayout& layout, const ModelSpec& spec) {
  validate(spec);
  require(spec.layout == Layout::twoway, "two-way layout requires a two-way model spec");
  const int R = layout.rows();
  const int C = layout.cols();
  std::vector<std::size_t> order = identity_order(layout.size());
  std::optional<std::pair<Eigen::Index, Eigen::Index>> split;
  if (spec.scheme) {
    require(spec.scheme->levels() == R, "scheme level count differs from the row count");
    const Partition part = partition_dataset(layout, *spec.scheme);
    order = concat(part);
    split = std::pair{static_cast<Eigen::Index>(part.n1()), static_cast<Eigen::Index>(part.n2())};
  }

  // Classes II and IV replace the column effects by group-by-column effects.
  const bool interaction = spec.model_class == 2 || spec.model_class == 4;
  const auto N = static_cast<Eigen::Index>(layout.size());
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(N, 1);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(N, R - 1);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(N, interaction ? 0 : C - 1);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(N, interaction ? 2 * (C - 1) : 0);
  for (Eigen::Index i = 0; i < N; ++i) {
    const std::size_t obs = order[static_cast<std::size_t>(i)];
    const int r = static_cast<int>(obs / static_cast<std::size_t>(C));
    const int col = static_cast<int>(obs % static_cast<std::size_t>(C));
    if (r > 0) w(i, r - 1) = 1.0;
    if (col == 0) continue;
    if (interaction) {
      const int g = spec.scheme->group_of(r);
      u(i, g * (C - 1) + col - 1) = 1.0;
    } else {
      v(i, col - 1) = 1.0;
    }
  }

  DesignBuilder builder(N);
  builder.add(Block::intercept, ones);
  builder.add(Block::level_effects, w);
  builder.add(Block::covariate_effects, v);
  builder.add(Block::interactions, u);
  return builder.finish(std::move(order), split);
}

SufficientStats sufficient_stats(const DesignMatrices& dm, const Eigen::VectorXd& y_obs) {
  const Eigen::VectorXd y = dm.gather(y_obs);
  SufficientStats s;
  s.N = dm.observations();
  s.P = dm.columns();

  const double mean = y.mean();
  s.sst = (y.array() - mean).square().sum();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.x);
  qr.setThreshold(1e-10);
  const Eigen::VectorXd beta = qr.solve(y);
  s.ss_resid = (y - dm.x * beta).squaredNorm();
  if (s.P == 1) s.ss_resid = s.sst;

  const double scale = std::max(y.squaredNorm(), 1e-300);
  if (!(s.ss_resid > 1e-24 * scale) || !(s.sst > 0.0)) {
    fail(ErrorCategory::degenerate_fit,
         "residual sum of squares is zero: the model fits the data exactly");
  }
  s.r_squared = std::clamp(1.0 - s.ss_resid / s.sst, 0.0, 1.0);
  s.q = 1.0 - s.r_squared;

  if (dm.group_split) {
    s.grouped = true;
    const auto [n1, n2] = *dm.group_split;
    s.n1 = n1;
    s.n2 = n2;
    // The group rows of a full design usually repeat columns, and
    // ColPivHouseholderQR::solve ignores the rank threshold, so the residual
    // is read off Q^T y past the thresholded rank instead.
    const auto fit_group = [](const Eigen::MatrixXd& xg, const Eigen::VectorXd& yg,
                              Eigen::Index& rank) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> q(xg);
      q.setThreshold(1e-10);
      rank = q.rank();
      const Eigen::VectorXd qty = q.householderQ().adjoint() * yg;
      return qty.tail(yg.size() - rank).squaredNorm();
    };
    s.ss_resid1 = fit_group(dm.x.topRows(n1), y.head(n1), s.p1);
    s.ss_resid2 = fit_group(dm.x.bottomRows(n2), y.tail(n2), s.p2);
    s.separable = s.p1 + s.p2 == s.P;
    if (s.separable) s.ss_resid = s.ss_resid1 + s.ss_resid2;
  } else {
    s.n1 = s.N;
    s.p1 = s.P;
    s.ss_resid1 = s.ss_resid;
  }
  return s;
}

}  // namespace slgf
