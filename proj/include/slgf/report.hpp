#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "slgf/design.hpp"
#include "slgf/error.hpp"
#include "slgf/posterior.hpp"

namespace slgf {

struct ReportMeta {
  std::string command;
  PriorSystem prior = PriorSystem::flat;
  std::optional<double> b_override;
  std::string data;
};

/// Rounds to 12 significant digits so JSON and CSV carry the same numbers.
double round_sig(double value);
std::string format_number(double value);

nlohmann::json table_to_json(const PosteriorTable& table, const ReportMeta& meta);
void write_json(const PosteriorTable& table, const ReportMeta& meta, std::ostream& out);

/// One row per model, class aggregate and scheme aggregate, told apart by
/// the leading `kind` column.
void write_csv(const PosteriorTable& table, std::ostream& out);

nlohmann::json error_json(ErrorCategory category, const std::string& message);

}  // namespace slgf
