#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slgf/data.hpp"

namespace fixtures {

// K levels with `per` observations each, a uniform(0, 10) covariate, level
// effects, and group-2 noise scaled by `sd2` for levels >= K/2.
inline slgf::Dataset ancova(std::uint32_t seed, int K, int per, double sd2 = 1.0, double slope = 0.4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> y, x;
  std::vector<std::string> labels;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < per; ++i) {
      const double xi = u(rng);
      const double sd = k >= K / 2 ? sd2 : 1.0;
      y.push_back(1.0 + (k >= K / 2 ? 1.5 : 0.0) + slope * xi + sd * z(rng));
      x.push_back(xi);
      labels.push_back(std::to_string(k + 1));
    }
  }
  return slgf::make_dataset(y, labels, x);
}

inline Eigen::VectorXd response(const slgf::Dataset& d) {
  return Eigen::Map<const Eigen::VectorXd>(d.y.data(), static_cast<Eigen::Index>(d.size()));
}

// R x C layout with additive effects and optional group-2 noise scale for the
// second half of the rows.
inline slgf::TwoWayLayout twoway(std::uint32_t seed, int R, int C, double sd2 = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  slgf::TwoWayLayout t;
  t.cells.resize(R, C);
  for (int r = 0; r < R; ++r) {
    t.row_labels.push_back("r" + std::to_string(r + 1));
    for (int c = 0; c < C; ++c) t.cells(r, c) = 0.5 * r + 0.8 * c + (r >= R / 2 ? sd2 : 1.0) * z(rng);
  }
  for (int c = 0; c < C; ++c) t.col_labels.push_back("c" + std::to_string(c + 1));
  return t;
}

}  // namespace fixtures
