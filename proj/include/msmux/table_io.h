#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msmux/analytics.h"

namespace msmux {

// Reads discard/attempt rows from CSV. Recognized header names (case
// sensitive, any order, unknown columns rejected):
//   d1, p,
//   D1 | D_IC_1 | D_IC^(1),   D4 | D_IC_4 | D_IC^(4),
//   A1 | A_IC_1 | A_IC^(1) | A_full_1 | A_full^(1),
//   A4 | A_IC_4 | A_IC^(4) | A_full_4 | A_full^(4),
//   rho | rho_IC | rho_full
// Discards accept fractions ("0.1560") or percentages ("15.60%"); rho is in
// percent with an optional '%'. Empty cells are absent values. Throws
// ParseError with the line number.
std::vector<TableRow> read_table_csv(std::istream& in,
                                     const std::string& source = {});

inline constexpr const char* kTableCsvHeader =
    "d1,p,D1,D4,A1,A4,rho,A1_calc,A4_calc,rho_calc,rho_from_printed_A,"
    "iid_D4,iid_residual,max_rel_dev,within_rel_tol,rounding_consistent,error";

void write_table_csv(std::ostream& out, const std::vector<TableRowResult>& rows);
nlohmann::json table_json(const std::vector<TableRowResult>& rows);

}  // namespace msmux
