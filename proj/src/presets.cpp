#include "msmux/presets.h"

namespace msmux {

namespace {

TableRow discard_row(int d1, double p, double d_single, double d_multi,
                     double a_single, double a_multi, double rho) {
  return {d1, p, d_single, d_multi, a_single, a_multi, rho};
}

TableRow attempts_row(int d1, double p, double a_single, double a_multi,
                      double rho) {
  return {d1, p, std::nullopt, std::nullopt, a_single, a_multi, rho};
}

TablePreset table2() {
  return {"table2",
          "injection-and-cultivation discard rate and expected-attempt "
          "reduction before escape (single site vs four sites)",
          {
              discard_row(3, 5e-4, 0.1560, 0.0006, 1.1849, 1.0006, 15.55),
              discard_row(3, 1e-3, 0.2873, 0.0076, 1.4031, 1.0077, 28.18),
              discard_row(3, 2e-3, 0.4903, 0.0656, 1.9620, 1.0702, 45.46),
              discard_row(5, 5e-4, 0.5931, 0.1269, 2.4575, 1.1453, 53.40),
              discard_row(5, 1e-3, 0.8344, 0.4897, 6.0397, 1.9595, 67.56),
              discard_row(5, 2e-3, 0.9720, 0.8968, 35.7590, 9.6876, 72.91),
          }};
}

TablePreset table3() {
  return {"table3",
          "full-cycle expected-attempt reduction at gap threshold G = 0 "
          "(single site vs four sites)",
          {
              attempts_row(3, 5e-4, 1.3632, 1.1332, 16.87),
              attempts_row(3, 1e-3, 1.8562, 1.2911, 30.44),
              attempts_row(3, 2e-3, 3.4288, 1.7473, 49.04),
              attempts_row(5, 5e-4, 4.4014, 1.9503, 55.69),
              attempts_row(5, 1e-3, 19.2822, 5.6465, 70.72),
              attempts_row(5, 2e-3, 364.7853, 77.7446, 78.69),
          }};
}

}  // namespace

std::optional<TablePreset> find_preset(const std::string& name) {
  if (name == "table2") return table2();
  if (name == "table3") return table3();
  return std::nullopt;
}

std::vector<std::string> preset_names() { return {"table2", "table3"}; }

DemoParameters demo_parameters() { return {}; }

}  // namespace msmux
