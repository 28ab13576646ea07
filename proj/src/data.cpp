#include "slgf/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include <boost/tokenizer.hpp>

#include "slgf/error.hpp"

namespace slgf {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  boost::escaped_list_separator<char> sep('\\', ',', '"');
  boost::tokenizer<boost::escaped_list_separator<char>> tokens(line, sep);
  std::vector<std::string> fields;
  for (const auto& t : tokens) fields.push_back(trim(t));
  return fields;
}

// Yields non-empty lines with their 1-based file line number.
struct CsvReader {
  std::istream& in;
  std::size_t line_no = 0;

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      try {
        fields = split_csv_line(line);
      } catch (const boost::escaped_list_error& e) {
        fail(ErrorCategory::parse, "line " + std::to_string(line_no) + ": " + e.what());
      }
      return true;
    }
    return false;
  }
};

double parse_real(const std::string& field, std::size_t line_no, std::string_view column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    fail(ErrorCategory::parse, "line " + std::to_string(line_no) + ", column '" +
                                   std::string(column) + "': cannot parse '" + field +
                                   "' as a real number");
  }
  if (!std::isfinite(value)) {
    fail(ErrorCategory::parse, "line " + std::to_string(line_no) + ", column '" +
                                   std::string(column) + "': non-finite value");
  }
  return value;
}

std::size_t column_index(const std::vector<std::string>& header, std::string_view name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    fail(ErrorCategory::configuration, "column '" + std::string(name) + "' not found in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\\") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::configuration, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Dataset make_dataset(std::vector<double> y, const std::vector<std::string>& labels,
                     std::optional<std::vector<double>> covariate) {
  Dataset data;
  data.y = std::move(y);
  data.covariate = std::move(covariate);
  std::unordered_map<std::string, int> index;
  data.level.reserve(labels.size());
  for (const auto& label : labels) {
    auto [it, inserted] = index.try_emplace(label, static_cast<int>(data.level_labels.size()));
    if (inserted) data.level_labels.push_back(label);
    data.level.push_back(it->second);
  }
  validate(data);
  return data;
}

void validate(const Dataset& data) {
  if (data.level.size() != data.y.size()) {
    fail(ErrorCategory::validation, "response and SLGF columns differ in length");
  }
  if (data.covariate && data.covariate->size() != data.y.size()) {
    fail(ErrorCategory::validation, "covariate and response columns differ in length");
  }
  if (data.levels() < 2) {
    fail(ErrorCategory::validation, "the SLGF needs at least two levels");
  }
  std::vector<std::size_t> counts(data.level_labels.size(), 0);
  for (int k : data.level) {
    if (k < 0 || k >= data.levels()) fail(ErrorCategory::validation, "level index out of range");
    ++counts[static_cast<std::size_t>(k)];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) {
      fail(ErrorCategory::validation, "level '" + data.level_labels[k] + "' has no observations");
    }
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(data.y.begin(), data.y.end(), finite)) {
    fail(ErrorCategory::validation, "non-finite response value");
  }
  if (data.covariate && !std::all_of(data.covariate->begin(), data.covariate->end(), finite)) {
    fail(ErrorCategory::validation, "non-finite covariate value");
  }
}

Dataset read_ancova_csv(std::istream& in, std::string_view response_col,
                        std::string_view slgf_col, std::optional<std::string> covariate_col) {
  CsvReader reader{in};
  std::vector<std::string> header;
  if (!reader.next(header)) fail(ErrorCategory::parse, "empty file: a header row is required");

  const auto iy = column_index(header, response_col);
  const auto ik = column_index(header, slgf_col);
  std::optional<std::size_t> ix;
  if (covariate_col) ix = column_index(header, *covariate_col);

  std::vector<double> y;
  std::vector<std::string> labels;
  std::optional<std::vector<double>> x;
  if (ix) x.emplace();

  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != header.size()) {
      fail(ErrorCategory::parse, "line " + std::to_string(reader.line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, found " +
                                     std::to_string(fields.size()));
    }
    y.push_back(parse_real(fields[iy], reader.line_no, response_col));
    if (fields[ik].empty()) {
      fail(ErrorCategory::parse,
           "line " + std::to_string(reader.line_no) + ": empty SLGF level");
    }
    labels.push_back(fields[ik]);
    if (ix) x->push_back(parse_real(fields[*ix], reader.line_no, *covariate_col));
  }

  Dataset data = make_dataset(std::move(y), labels, std::move(x));
  data.response_name = std::string(response_col);
  data.slgf_name = std::string(slgf_col);
  if (covariate_col) data.covariate_name = *covariate_col;
  return data;
}

Dataset load_ancova_csv(const std::filesystem::path& path, std::string_view response_col,
                        std::string_view slgf_col, std::optional<std::string> covariate_col) {
  auto in = open_input(path);
  return read_ancova_csv(in, response_col, slgf_col, std::move(covariate_col));
}

void write_ancova_csv(const Dataset& data, std::ostream& out) {
  out << quote_if_needed(data.response_name) << ',' << quote_if_needed(data.slgf_name);
  if (data.covariate) out << ',' << quote_if_needed(data.covariate_name);
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_real(data.y[i]) << ','
        << quote_if_needed(data.level_labels[static_cast<std::size_t>(data.level[i])]);
    if (data.covariate) out << ',' << format_real((*data.covariate)[i]);
    out << '\n';
  }
}

Eigen::VectorXd TwoWayLayout::response() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(size()));
  for (std::size_t n = 0; n < size(); ++n) y(static_cast<Eigen::Index>(n)) = observation(n);
  return y;
}

void validate(const TwoWayLayout& layout) {
  if (layout.rows() < 2 || layout.cols() < 2) {
    fail(ErrorCategory::validation, "a two-way layout needs at least 2 rows and 2 columns");
  }
  if (static_cast<int>(layout.row_labels.size()) != layout.rows() ||
      static_cast<int>(layout.col_labels.size()) != layout.cols()) {
    fail(ErrorCategory::validation, "label count does not match the table shape");
  }
  if (!layout.cells.allFinite()) fail(ErrorCategory::validation, "non-finite cell value");
}

TwoWayLayout read_twoway_csv(std::istream& in) {
  CsvReader reader{in};
  std::vector<std::string> header;
  if (!reader.next(header)) fail(ErrorCategory::parse, "empty file: a header row is required");
  if (header.size() < 2) fail(ErrorCategory::parse, "header must contain column labels");

  TwoWayLayout layout;
  layout.col_labels.assign(header.begin() + 1, header.end());
  const std::size_t ncol = layout.col_labels.size();

  std::vector<std::vector<double>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != header.size()) {
      fail(ErrorCategory::parse, "line " + std::to_string(reader.line_no) +
                                     ": ragged row (expected " + std::to_string(header.size()) +
                                     " fields, found " + std::to_string(fields.size()) + ")");
    }
    layout.row_labels.push_back(fields[0]);
    std::vector<double> row(ncol);
    for (std::size_t c = 0; c < ncol; ++c) {
      if (fields[c + 1].empty()) {
        fail(ErrorCategory::validation, "line " + std::to_string(reader.line_no) +
                                            ": missing cell in column '" +
                                            layout.col_labels[c] + "'");
      }
      row[c] = parse_real(fields[c + 1], reader.line_no, layout.col_labels[c]);
    }
    rows.push_back(std::move(row));
  }

  layout.cells.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncol));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < ncol; ++c) {
      layout.cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  validate(layout);
  return layout;
}

TwoWayLayout load_twoway_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_twoway_csv(in);
}

void write_twoway_csv(const TwoWayLayout& layout, std::ostream& out) {
  out << "row";
  for (const auto& c : layout.col_labels) out << ',' << quote_if_needed(c);
  out << '\n';
  for (int r = 0; r < layout.rows(); ++r) {
    out << quote_if_needed(layout.row_labels[static_cast<std::size_t>(r)]);
    for (int c = 0; c < layout.cols(); ++c) out << ',' << format_real(layout.cells(r, c));
    out << '\n';
  }
}

TwoWayLayout read_twoway_long_csv(std::istream& in, std::string_view response_col,
                                  std::string_view row_col, std::string_view col_col) {
  CsvReader reader{in};
  std::vector<std::string> header;
  if (!reader.next(header)) fail(ErrorCategory::parse, "empty file: a header row is required");
  const auto iy = column_index(header, response_col);
  const auto ir = column_index(header, row_col);
  const auto ic = column_index(header, col_col);

  std::vector<std::string> row_labels, col_labels;
  std::unordered_map<std::string, std::size_t> row_index, col_index;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;

  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != header.size()) {
      fail(ErrorCategory::parse, "line " + std::to_string(reader.line_no) + ": ragged row");
    }
    const double v = parse_real(fields[iy], reader.line_no, response_col);
    auto [rit, rnew] = row_index.try_emplace(fields[ir], row_labels.size());
    if (rnew) row_labels.push_back(fields[ir]);
    auto [cit, cnew] = col_index.try_emplace(fields[ic], col_labels.size());
    if (cnew) col_labels.push_back(fields[ic]);
    if (!cells.try_emplace({rit->second, cit->second}, v).second) {
      fail(ErrorCategory::validation, "line " + std::to_string(reader.line_no) +
                                          ": duplicate cell (" + fields[ir] + ", " + fields[ic] +
                                          "); the layout must be unreplicated");
    }
  }

  TwoWayLayout layout;
  layout.row_labels = row_labels;
  layout.col_labels = col_labels;
  layout.cells.resize(static_cast<Eigen::Index>(row_labels.size()),
                      static_cast<Eigen::Index>(col_labels.size()));
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
      const auto it = cells.find({r, c});
      if (it == cells.end()) {
        fail(ErrorCategory::validation,
             "missing cell (" + row_labels[r] + ", " + col_labels[c] + ")");
      }
      layout.cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = it->second;
    }
  }
  validate(layout);
  return layout;
}

TwoWayLayout transpose_layout(const TwoWayLayout& layout) {
  TwoWayLayout t;
  t.cells = layout.cells.transpose();
  t.row_labels = layout.col_labels;
  t.col_labels = layout.row_labels;
  return t;
}

TwoWayLayout builtin_layout(std::string_view name) {
  if (name.starts_with("builtin:")) name.remove_prefix(8);
  if (name == "dog-lymphoma") {
    // Genomic hybridization signal for six dogs, two tissue samples each.
    TwoWayLayout layout;
    layout.cells.resize(6, 2);
    layout.cells << 9.33, 9.22,
                    9.51, 9.39,
                    8.75, 9.42,
                    8.64, 9.25,
                    9.50, 9.46,
                    8.73, 9.35;
    layout.row_labels = {"dog1", "dog2", "dog3", "dog4", "dog5", "dog6"};
    layout.col_labels = {"tissue1", "tissue2"};
    return layout;
  }
  fail(ErrorCategory::configuration, "unknown builtin dataset '" + std::string(name) + "'");
}

std::vector<std::string> builtin_layout_names() { return {"dog-lymphoma"}; }

}  // namespace slgf
