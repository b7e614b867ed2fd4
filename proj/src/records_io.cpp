#include "msmux/records_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msmux/errors.h"
#include "msmux/format.h"

namespace msmux {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_gap(const std::string& text, const std::string& source,
                 std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    if (!(v >= 0.0) || std::isinf(v)) {
      throw ParseError(source, line, "gap must be finite and >= 0");
    }
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError(source, line, "bad gap '" + text + "'");
  }
}

}  // namespace

std::vector<ShotRecord> read_records_jsonl(std::istream& in,
                                           const std::string& source) {
  std::vector<ShotRecord> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t blank_at = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      if (blank_at == 0) blank_at = line_no;
      continue;
    }
    if (blank_at != 0) throw ParseError(source, blank_at, "blank record line");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(source, line_no, "record must be a JSON object");
    ShotRecord r;
    r.source = RecordSource::Ingested;
    bool have_gap = false;
    bool have_correct = false;
    for (const auto& [key, value] : j.items()) {
      if (key == "gap") {
        if (!value.is_number()) throw ParseError(source, line_no, "gap must be a number");
        r.gap = value.get<double>();
        if (!(r.gap >= 0.0) || std::isinf(r.gap)) {
          throw ParseError(source, line_no, "gap must be finite and >= 0");
        }
        have_gap = true;
      } else if (key == "correct") {
        if (!value.is_boolean()) throw ParseError(source, line_no, "correct must be a boolean");
        r.correct = value.get<bool>();
        have_correct = true;
      } else if (key == "attempts_consumed") {
        if (!value.is_number_integer() || value.get<std::int64_t>() < 1) {
          throw ParseError(source, line_no, "attempts_consumed must be an integer >= 1");
        }
        r.attempts_consumed = value.get<std::uint64_t>();
      } else {
        throw ParseError(source, line_no, "unknown key '" + key + "'");
      }
    }
    if (!have_gap) throw ParseError(source, line_no, "missing gap");
    if (!have_correct) throw ParseError(source, line_no, "missing correct");
    out.push_back(r);
  }
  return out;
}

std::vector<ShotRecord> read_records_csv(std::istream& in,
                                         const std::string& source) {
  std::vector<ShotRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "gap,correct") {
        throw ParseError(source, line_no, "expected header \"gap,correct\"");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ParseError(source, line_no, "expected two fields");
    }
    ShotRecord r;
    r.gap = parse_gap(trim(line.substr(0, comma)), source, line_no);
    const std::string flag = trim(line.substr(comma + 1));
    if (flag == "1" || flag == "true") {
      r.correct = true;
    } else if (flag == "0" || flag == "false") {
      r.correct = false;
    } else {
      throw ParseError(source, line_no, "bad correct flag '" + flag + "'");
    }
    out.push_back(r);
  }
  if (!header_seen) throw ParseError(source, 0, "missing header \"gap,correct\"");
  return out;
}

std::vector<ShotRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return read_records_csv(in, path);
  }
  return read_records_jsonl(in, path);
}

void write_records_jsonl(std::ostream& out, std::span<const ShotRecord> records) {
  for (const ShotRecord& r : records) {
    nlohmann::json j;
    j["gap"] = json_number(r.gap);
    j["correct"] = r.correct;
    if (r.attempts_consumed) j["attempts_consumed"] = *r.attempts_consumed;
    out << j.dump() << '\n';
  }
}

std::uint64_t attempts_from_records(std::span<const ShotRecord> records) {
  std::uint64_t total = 0;
  for (const ShotRecord& r : records) {
    if (!r.attempts_consumed) return records.size();
    total += *r.attempts_consumed;
  }
  return records.empty() ? 0 : total;
}

void write_curve_csv(std::ostream& out, const SweepCurve& curve) {
  out << kCurveCsvHeader << '\n';
  for (const SweepPoint& p : curve.points) {
    out << format_number(p.threshold) << ',' << format_number(p.kept_correct)
        << ',' << format_number(p.kept_error) << ','
        << format_optional(p.attempts) << ',' << format_optional(p.logical_error)
        << ',' << (p.extrapolated ? 1 : 0) << '\n';
  }
}

}  // namespace msmux
