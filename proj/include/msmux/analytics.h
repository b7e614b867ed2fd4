#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace msmux {

// Expected attempts at discard probability 1.
inline constexpr double kInfiniteAttempts =
    std::numeric_limits<double>::infinity();

struct StageStats {
  double discard = 0.0;
  double attempts = 1.0;  // 1 / (1 - discard), kInfiniteAttempts at discard 1
  double kept_fraction = 1.0;
};

// Geometric-retry expectation 1 / (1 - discard). Throws DomainError outside
// [0, 1].
double expected_attempts(double discard);
StageStats stage_stats(double discard);

// Discard probability of k identical independent sites: discard^k.
double iid_multiplex_discard(double single_site_discard, int k);

// Relative reduction (1 - multiplexed / baseline) * 100, in percent. An
// infinite baseline with finite multiplexed attempts gives 100; two infinite
// inputs throw DomainError.
double attempt_reduction(double baseline_attempts, double multiplexed_attempts);

struct Independent {
  friend bool operator==(const Independent&, const Independent&) = default;
};

// With probability `c` all sites share a single Bernoulli draw at the mean
// per-site failure rate; otherwise sites fail independently.
struct CommonMode {
  double c = 0.0;
  friend bool operator==(const CommonMode&, const CommonMode&) = default;
};

// Full joint distribution over the 2^k failure patterns. Bit i of the table
// index is set when site i+1 fails, so the last entry is the all-fail
// probability.
struct ExplicitJoint {
  std::vector<double> table;
  friend bool operator==(const ExplicitJoint&, const ExplicitJoint&) = default;
};

using Correlation = std::variant<Independent, CommonMode, ExplicitJoint>;

struct FailureModel {
  int k = 4;
  std::vector<double> per_site_fail;
  Correlation correlation = Independent{};

  static FailureModel independent(std::vector<double> per_site_fail);
  static FailureModel identical(int k, double fail);

  double mean_fail() const;
  friend bool operator==(const FailureModel&, const FailureModel&) = default;
};

inline constexpr double kJointSumTolerance = 1e-12;
inline constexpr double kJointMarginalTolerance = 1e-9;
inline constexpr int kMaxJointSites = 20;

// Throws ModelError on any invariant violation.
void validate(const FailureModel& model);

// Pr(every site fails).
double all_fail_probability(const FailureModel& model);
// Pr(at least one site passes) = 1 - all_fail_probability.
double multiplex_pass_probability(const FailureModel& model);

// Product-form joint table for independent sites with the given rates.
std::vector<double> product_joint_table(const std::vector<double>& per_site_fail);
// Single-site marginals Pr(site i fails) of a joint table.
std::vector<double> joint_marginals(const std::vector<double>& table, int k);

// One row of a discard/attempt table. When a discard column is present the
// attempts are recomputed from it and any given attempt column is treated as a
// printed reference; otherwise the attempt columns are the inputs.
struct TableRow {
  int d1 = 0;
  double p = 0.0;
  std::optional<double> discard_single;
  std::optional<double> discard_multi;
  std::optional<double> attempts_single;
  std::optional<double> attempts_multi;
  std::optional<double> reduction_pct;  // printed reference
};

// Comparison of a recomputed value with a printed reference.
struct ReferenceCheck {
  std::string quantity;
  double reference = 0.0;
  double computed = 0.0;
  double relative_deviation = 0.0;
  bool within_relative = false;  // |computed - reference| <= rel_tol * |reference|
  // The printed reference is reachable from some input inside the rounding
  // interval of the printed inputs.
  bool rounding_consistent = false;
};

struct TableTolerance {
  double relative = 5e-4;
  // Half unit in the last printed place: discards as fractions with four
  // digits, attempts with four decimals, reductions in percent with two.
  double discard_half_ulp = 5e-5;
  double attempts_half_ulp = 5e-5;
  double reduction_half_ulp = 5e-3;
};

struct TableRowResult {
  TableRow input;
  std::optional<StageStats> single;
  std::optional<StageStats> multi;
  std::optional<double> reduction_pct;
  // Reduction from the printed attempt columns, when both discards and
  // attempts were given.
  std::optional<double> reduction_from_printed_attempts_pct;
  // discard_single^4 and its difference to the measured multi-site discard.
  std::optional<double> iid_estimate;
  std::optional<double> iid_residual;
  std::vector<ReferenceCheck> checks;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
  bool all_within_relative() const;
  bool all_rounding_consistent() const;
};

std::vector<TableRowResult> reproduce_table(const std::vector<TableRow>& rows,
                                            int sites = 4,
                                            const TableTolerance& tol = {});

}  // namespace msmux
