#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slgf/data.hpp"

namespace slgf {

/// Two-group partition of the SLGF levels, stored as the bitmask of group 2.
/// Level 0 always belongs to group 1, so every unordered partition has exactly
/// one representation.
class GroupingScheme {
 public:
  static constexpr int max_levels = 30;

  GroupingScheme() = default;

  /// Any non-trivial mask is accepted; it is flipped if it contains level 0.
  static GroupingScheme from_mask(int levels, std::uint64_t group2_mask);
  static GroupingScheme from_groups(int levels, std::span<const int> group1,
                                    std::span<const int> group2);
  /// Parses the "1,4,5:2,3,6" label format (1-based levels, either order).
  static GroupingScheme parse(int levels, std::string_view label);

  int levels() const noexcept { return levels_; }
  std::uint64_t group2_mask() const noexcept { return mask_; }
  bool in_group2(int level) const noexcept { return (mask_ >> level) & 1U; }
  int group_of(int level) const noexcept { return in_group2(level) ? 1 : 0; }
  int size1() const noexcept;
  int size2() const noexcept;
  std::vector<int> group1() const;
  std::vector<int> group2() const;

  friend auto operator<=>(const GroupingScheme&, const GroupingScheme&) = default;

 private:
  GroupingScheme(int levels, std::uint64_t mask) : levels_(levels), mask_(mask) {}

  int levels_ = 0;
  std::uint64_t mask_ = 0;
};

/// All canonical partitions with both groups of size >= min_group_size,
/// ascending by group-2 mask. May be empty.
std::vector<GroupingScheme> enumerate_schemes(int levels, int min_group_size);

/// 2^(K-1) - 1 for min 1, 2^(K-1) - K - 1 for min 2 (general min handled by
/// binomial sums).
std::size_t scheme_count(int levels, int min_group_size);

std::string scheme_label(const GroupingScheme& scheme);

struct Partition {
  std::vector<std::size_t> indices1;
  std::vector<std::size_t> indices2;
  std::size_t n1() const noexcept { return indices1.size(); }
  std::size_t n2() const noexcept { return indices2.size(); }
};

Partition partition_dataset(const Dataset& data, const GroupingScheme& scheme);
/// Observations are indexed row-major (r * C + c); rows are the SLGF.
Partition partition_dataset(const TwoWayLayout& layout, const GroupingScheme& scheme);

}  // namespace slgf
