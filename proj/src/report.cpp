#include "slgf/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace slgf {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& w : items) out += (out.empty() ? "" : "; ") + w;
  return out;
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

double round_sig(double value) {
  if (!std::isfinite(value)) return value;
  return std::stod(format_number(value));
}

nlohmann::json table_to_json(const PosteriorTable& table, const ReportMeta& meta) {
  using nlohmann::json;
  json models = json::array();
  for (const auto& e : table.entries) {
    models.push_back({
        {"class", class_name(e.spec.model_class)},
        {"scheme", e.spec.scheme ? json(e.scheme_label) : json(nullptr)},
        {"log_marginal", std::isfinite(e.log_q) ? json(round_sig(e.log_q)) : json(nullptr)},
        {"prior", round_sig(e.prior)},
        {"posterior", round_sig(e.posterior)},
        {"warnings", e.warnings},
    });
  }
  json classes = json::object();
  for (const auto& [c, p] : table.class_aggregates) classes[class_name(c)] = round_sig(p);
  json schemes = json::object();
  for (const auto& [s, p] : table.scheme_aggregates) schemes[s] = round_sig(p);

  json out = {
      {"command", meta.command},
      {"layout", std::string(to_string(table.layout))},
      {"prior_system", std::string(to_string(meta.prior))},
      {"data", meta.data},
      {"models", models},
      {"class_aggregates", classes},
      {"scheme_aggregates", schemes},
  };
  if (meta.b_override) out["b_override"] = *meta.b_override;
  return out;
}

void write_json(const PosteriorTable& table, const ReportMeta& meta, std::ostream& out) {
  out << table_to_json(table, meta).dump(2) << '\n';
}

void write_csv(const PosteriorTable& table, std::ostream& out) {
  out << "kind,class,scheme,log_marginal,prior,posterior,warnings\n";
  for (const auto& e : table.entries) {
    out << "model," << class_name(e.spec.model_class) << ',' << (e.spec.scheme ? csv_field(e.scheme_label) : "")
        << ',' << format_number(e.log_q) << ',' << format_number(e.prior) << ',' << format_number(e.posterior)
        << ',' << csv_field(joined(e.warnings)) << '\n';
  }
  for (const auto& [c, p] : table.class_aggregates) {
    out << "class," << class_name(c) << ",,,," << format_number(p) << ",\n";
  }
  for (const auto& [s, p] : table.scheme_aggregates) {
    out << "scheme,," << csv_field(s) << ",,," << format_number(p) << ",\n";
  }
}

nlohmann::json error_json(ErrorCategory category, const std::string& message) {
  return {{"error", {{"category", std::string(to_string(category))}, {"message", message}}}};
}

}  // namespace slgf
