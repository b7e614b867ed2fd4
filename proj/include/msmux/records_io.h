#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "msmux/gap_analysis.h"

namespace msmux {

// JSONL, one object per line: {"gap": number >= 0, "correct": bool,
// "attempts_consumed": integer >= 1 (optional)}. Unknown keys and blank
// lines other than a trailing one are rejected. Errors carry the 1-based
// record (line) number.
std::vector<ShotRecord> read_records_jsonl(std::istream& in,
                                           const std::string& source = {});
// CSV with header "gap,correct"; correct is one of 1/0/true/false.
std::vector<ShotRecord> read_records_csv(std::istream& in,
                                         const std::string& source = {});
// Dispatches on the ".csv" extension; everything else is read as JSONL.
std::vector<ShotRecord> read_records_file(const std::string& path);

void write_records_jsonl(std::ostream& out, std::span<const ShotRecord> records);

// Sum of attempts_consumed when every record carries it, else the record
// count.
std::uint64_t attempts_from_records(std::span<const ShotRecord> records);

inline constexpr const char* kCurveCsvHeader =
    "G,kept_correct,kept_error,attempts,logical_error,extrapolated";

// Undefined attempts / logical error render as "nan".
void write_curve_csv(std::ostream& out, const SweepCurve& curve);

}  // namespace msmux
