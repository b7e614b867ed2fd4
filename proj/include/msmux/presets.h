#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msmux/analytics.h"

namespace msmux {

struct DemoParameters {
  std::vector<int> d1 = {3, 5};  // local cultivation distance
  int d2 = 15;                   // escaped patch distance
  std::string r1 = "d1";         // growing rounds equal the local distance
  int r2 = 5;                    // escape rounds
  std::vector<double> p = {5e-4, 1e-3, 2e-3};
};

struct TablePreset {
  std::string name;
  std::string description;
  std::vector<TableRow> rows;
};

// Reference demonstration values, verbatim:
//   "table2": single- and four-site injection-and-cultivation discards with
//             printed attempts and reductions;
//   "table3": full-cycle attempts at gap threshold 0 with reductions.
std::optional<TablePreset> find_preset(const std::string& name);
std::vector<std::string> preset_names();
DemoParameters demo_parameters();

}  // namespace msmux
