#include "slgf/schemes.hpp"

#include <bit>
#include <charconv>

#include "slgf/error.hpp"

namespace slgf {
namespace {

std::uint64_t full_mask(int levels) {
  return levels >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << levels) - 1;
}

void check_levels(int levels) {
  if (levels < 2 || levels > GroupingScheme::max_levels) {
    fail(ErrorCategory::configuration,
         "number of SLGF levels must be in [2, " + std::to_string(GroupingScheme::max_levels) +
             "], got " + std::to_string(levels));
  }
}

std::uint64_t parse_group(std::string_view text, int levels) {
  std::uint64_t mask = 0;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto token = text.substr(0, comma);
    int level = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), level);
    if (ec != std::errc() || ptr != token.data() + token.size() || level < 1 || level > levels) {
      fail(ErrorCategory::parse, "bad level '" + std::string(token) + "' in scheme label");
    }
    mask |= std::uint64_t{1} << (level - 1);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return mask;
}

std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

GroupingScheme GroupingScheme::from_mask(int levels, std::uint64_t group2_mask) {
  check_levels(levels);
  const auto all = full_mask(levels);
  if ((group2_mask & ~all) != 0) {
    fail(ErrorCategory::contract_violation, "scheme references a level beyond K");
  }
  if (group2_mask & 1U) group2_mask = all & ~group2_mask;
  if (group2_mask == 0 || group2_mask == all) {
    fail(ErrorCategory::contract_violation, "both groups of a scheme must be non-empty");
  }
  return GroupingScheme(levels, group2_mask);
}

GroupingScheme GroupingScheme::from_groups(int levels, std::span<const int> group1,
                                           std::span<const int> group2) {
  check_levels(levels);
  std::uint64_t m1 = 0, m2 = 0;
  for (int k : group1) {
    require(k >= 0 && k < levels, "scheme references a level beyond K");
    m1 |= std::uint64_t{1} << k;
  }
  for (int k : group2) {
    require(k >= 0 && k < levels, "scheme references a level beyond K");
    m2 |= std::uint64_t{1} << k;
  }
  require((m1 & m2) == 0 && (m1 | m2) == full_mask(levels),
          "scheme groups must be disjoint and cover every level");
  return from_mask(levels, m2);
}

GroupingScheme GroupingScheme::parse(int levels, std::string_view label) {
  check_levels(levels);
  const auto colon = label.find(':');
  if (colon == std::string_view::npos) {
    fail(ErrorCategory::parse, "scheme label '" + std::string(label) + "' lacks a ':'");
  }
  const auto m1 = parse_group(label.substr(0, colon), levels);
  const auto m2 = parse_group(label.substr(colon + 1), levels);
  if ((m1 & m2) != 0 || (m1 | m2) != full_mask(levels)) {
    fail(ErrorCategory::parse, "scheme label '" + std::string(label) +
                                   "' must partition all " + std::to_string(levels) + " levels");
  }
  return from_mask(levels, m2);
}

int GroupingScheme::size2() const noexcept { return std::popcount(mask_); }
int GroupingScheme::size1() const noexcept { return levels_ - size2(); }

std::vector<int> GroupingScheme::group1() const {
  std::vector<int> out;
  for (int k = 0; k < levels_; ++k)
    if (!in_group2(k)) out.push_back(k);
  return out;
}

std::vector<int> GroupingScheme::group2() const {
  std::vector<int> out;
  for (int k = 0; k < levels_; ++k)
    if (in_group2(k)) out.push_back(k);
  return out;
}

std::vector<GroupingScheme> enumerate_schemes(int levels, int min_group_size) {
  check_levels(levels);
  if (min_group_size < 1) fail(ErrorCategory::configuration, "min_group_size must be positive");
  std::vector<GroupingScheme> out;
  const std::uint64_t all = full_mask(levels);
  // Even masks are exactly those with level 0 in group 1.
  for (std::uint64_t mask = 2; mask < all; mask += 2) {
    const int n2 = std::popcount(mask);
    if (n2 >= min_group_size && levels - n2 >= min_group_size) {
      out.push_back(GroupingScheme::from_mask(levels, mask));
    }
  }
  return out;
}

std::size_t scheme_count(int levels, int min_group_size) {
  check_levels(levels);
  // Group 2 is any subset of levels 2..K of size s with min <= s <= K - min.
  std::uint64_t total = 0;
  for (int s = std::max(min_group_size, 1); s <= levels - std::max(min_group_size, 1); ++s) {
    total += binomial(levels - 1, s);
  }
  return static_cast<std::size_t>(total);
}

std::string scheme_label(const GroupingScheme& scheme) {
  std::string out;
  const auto append = [&out](const std::vector<int>& group) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(group[i] + 1);
    }
  };
  append(scheme.group1());
  out += ':';
  append(scheme.group2());
  return out;
}

Partition partition_dataset(const Dataset& data, const GroupingScheme& scheme) {
  require(scheme.levels() == data.levels(), "scheme level count differs from the dataset's");
  Partition part;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (scheme.in_group2(data.level[i]) ? part.indices2 : part.indices1).push_back(i);
  }
  return part;
}

Partition partition_dataset(const TwoWayLayout& layout, const GroupingScheme& scheme) {
  require(scheme.levels() == layout.rows(), "scheme level count differs from the row count");
  Partition part;
  const auto cols = static_cast<std::size_t>(layout.cols());
  for (std::size_t n = 0; n < layout.size(); ++n) {
    (scheme.in_group2(static_cast<int>(n / cols)) ? part.indices2 : part.indices1).push_back(n);
  }
  return part;
}

}  // namespace slgf
