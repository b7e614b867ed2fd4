#include "msmux/table_io.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "msmux/errors.h"
#include "msmux/format.h"

namespace msmux {

namespace {

enum class Column { D1Label, P, DSingle, DMulti, ASingle, AMulti, Rho };

const std::map<std::string, Column>& column_names() {
  static const std::map<std::string, Column> names = {
      {"d1", Column::D1Label},       {"p", Column::P},
      {"D1", Column::DSingle},       {"D_IC_1", Column::DSingle},
      {"D_IC^(1)", Column::DSingle}, {"D4", Column::DMulti},
      {"D_IC_4", Column::DMulti},    {"D_IC^(4)", Column::DMulti},
      {"A1", Column::ASingle},       {"A_IC_1", Column::ASingle},
      {"A_IC^(1)", Column::ASingle}, {"A_full_1", Column::ASingle},
      {"A_full^(1)", Column::ASingle}, {"A4", Column::AMulti},
      {"A_IC_4", Column::AMulti},    {"A_IC^(4)", Column::AMulti},
      {"A_full_4", Column::AMulti},  {"A_full^(4)", Column::AMulti},
      {"rho", Column::Rho},          {"rho_IC", Column::Rho},
      {"rho_full", Column::Rho},
  };
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& source,
                    std::size_t line, const std::string& column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(source, line, "bad value '" + text + "' in column " + column);
}

// Percent strings become fractions when `percent_to_fraction`, otherwise
// the '%' is just stripped.
double parse_maybe_percent(std::string text, bool percent_to_fraction,
                           const std::string& source, std::size_t line,
                           const std::string& column) {
  bool percent = false;
  if (!text.empty() && text.back() == '%') {
    percent = true;
    text = trim(text.substr(0, text.size() - 1));
  }
  const double v = parse_double(text, source, line, column);
  return percent && percent_to_fraction ? v / 100.0 : v;
}

}  // namespace

std::vector<TableRow> read_table_csv(std::istream& in, const std::string& source) {
  std::vector<TableRow> rows;
  std::vector<std::pair<Column, std::string>> columns;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(trim(line));
    if (columns.empty()) {
      for (const std::string& name : fields) {
        auto it = column_names().find(name);
        if (it == column_names().end()) {
          throw ParseError(source, line_no, "unknown column '" + name + "'");
        }
        for (const auto& [c, n] : columns) {
          if (c == it->second) throw ParseError(source, line_no, "duplicate column '" + name + "'");
        }
        columns.emplace_back(it->second, name);
      }
      continue;
    }
    if (fields.size() != columns.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(columns.size()) +
                           " fields, got " + std::to_string(fields.size()));
    }
    TableRow row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string& text = fields[i];
      if (text.empty()) continue;
      const auto& [column, name] = columns[i];
      switch (column) {
        case Column::D1Label: {
          const double v = parse_double(text, source, line_no, name);
          if (v != std::floor(v)) throw ParseError(source, line_no, "d1 must be an integer");
          row.d1 = static_cast<int>(v);
          break;
        }
        case Column::P: row.p = parse_double(text, source, line_no, name); break;
        case Column::DSingle:
          row.discard_single = parse_maybe_percent(text, true, source, line_no, name);
          break;
        case Column::DMulti:
          row.discard_multi = parse_maybe_percent(text, true, source, line_no, name);
          break;
        case Column::ASingle:
          row.attempts_single = parse_double(text, source, line_no, name);
          break;
        case Column::AMulti:
          row.attempts_multi = parse_double(text, source, line_no, name);
          break;
        case Column::Rho:
          row.reduction_pct = parse_maybe_percent(text, false, source, line_no, name);
          break;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

double max_relative_deviation(const TableRowResult& r) {
  double m = 0.0;
  for (const ReferenceCheck& c : r.checks) m = std::max(m, c.relative_deviation);
  return m;
}

std::string opt(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

void write_table_csv(std::ostream& out, const std::vector<TableRowResult>& rows) {
  out << kTableCsvHeader << '\n';
  for (const TableRowResult& r : rows) {
    const TableRow& in = r.input;
    out << in.d1 << ',' << format_number(in.p) << ',' << opt(in.discard_single)
        << ',' << opt(in.discard_multi) << ',' << opt(in.attempts_single) << ','
        << opt(in.attempts_multi) << ',' << opt(in.reduction_pct) << ',';
    if (!r.ok()) {
      std::string msg = *r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << ",,,,,,,,," << msg << '\n';
      continue;
    }
    out << format_number(r.single->attempts) << ','
        << format_number(r.multi->attempts) << ',' << opt(r.reduction_pct) << ','
        << opt(r.reduction_from_printed_attempts_pct) << ',' << opt(r.iid_estimate)
        << ',' << opt(r.iid_residual) << ','
        << (r.checks.empty() ? std::string() : format_number(max_relative_deviation(r)))
        << ',' << (r.all_within_relative() ? 1 : 0) << ','
        << (r.all_rounding_consistent() ? 1 : 0) << ",\n";
  }
}

nlohmann::json table_json(const std::vector<TableRowResult>& rows) {
  using nlohmann::json;
  json out = json::array();
  for (const TableRowResult& r : rows) {
    const TableRow& in = r.input;
    json row;
    row["input"] = {{"d1", in.d1},
                    {"p", json_number(in.p)},
                    {"D1", json_optional(in.discard_single)},
                    {"D4", json_optional(in.discard_multi)},
                    {"A1", json_optional(in.attempts_single)},
                    {"A4", json_optional(in.attempts_multi)},
                    {"rho", json_optional(in.reduction_pct)}};
    if (!r.ok()) {
      row["error"] = *r.error;
      out.push_back(row);
      continue;
    }
    row["computed"] = {
        {"A1", json_number(r.single->attempts)},
        {"A4", json_number(r.multi->attempts)},
        {"rho", json_optional(r.reduction_pct)},
        {"rho_from_printed_A", json_optional(r.reduction_from_printed_attempts_pct)},
        {"iid_D4", json_optional(r.iid_estimate)},
        {"iid_residual", json_optional(r.iid_residual)}};
    json checks = json::array();
    for (const ReferenceCheck& c : r.checks) {
      checks.push_back({{"quantity", c.quantity},
                        {"reference", json_number(c.reference)},
                        {"computed", json_number(c.computed)},
                        {"relative_deviation", json_number(c.relative_deviation)},
                        {"within_relative_tolerance", c.within_relative},
                        {"rounding_consistent", c.rounding_consistent}});
    }
    row["checks"] = checks;
    row["mismatch"] = !r.all_rounding_consistent();
    out.push_back(row);
  }
  return out;
}

}  // namespace msmux
