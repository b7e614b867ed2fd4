#include "msmux/analytics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>
#include <string>

#include "msmux/errors.h"

namespace msmux {

namespace {

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

void require_probability(double x, const char* what) {
  if (!is_probability(x)) {
    throw DomainError(std::string(what) + " must lie in [0, 1], got " +
                      std::to_string(x));
  }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

bool overlaps(double lo_a, double hi_a, double lo_b, double hi_b) {
  return lo_a <= hi_b && lo_b <= hi_a;
}

ReferenceCheck make_check(std::string quantity, double reference,
                          double computed, double rel_tol,
                          bool rounding_consistent) {
  ReferenceCheck check;
  check.quantity = std::move(quantity);
  check.reference = reference;
  check.computed = computed;
  check.relative_deviation =
      reference == 0.0 ? std::abs(computed)
                       : std::abs(computed - reference) / std::abs(reference);
  check.within_relative = check.relative_deviation <= rel_tol;
  check.rounding_consistent = rounding_consistent;
  return check;
}

// Attempts is increasing in discard, so the rounding interval of the discard
// maps onto an attempts interval through its endpoints.
bool attempts_consistent(double discard, double printed_attempts,
                         const TableTolerance& tol) {
  const double lo = expected_attempts(clamp01(discard - tol.discard_half_ulp));
  const double hi = expected_attempts(clamp01(discard + tol.discard_half_ulp));
  return overlaps(lo, hi, printed_attempts - tol.attempts_half_ulp,
                  printed_attempts + tol.attempts_half_ulp);
}

double reduction_from_discards(double d_single, double d_multi) {
  return attempt_reduction(expected_attempts(d_single),
                           expected_attempts(d_multi));
}

bool reduction_consistent_from_discards(double d_single, double d_multi,
                                        double printed,
                                        const TableTolerance& tol) {
  const double h = tol.discard_half_ulp;
  // Reduction grows with the single-site discard and shrinks with the
  // multi-site discard.
  const double lo = reduction_from_discards(clamp01(d_single - h),
                                            clamp01(d_multi + h));
  const double hi = reduction_from_discards(clamp01(d_single + h),
                                            clamp01(d_multi - h));
  return overlaps(lo, hi, printed - tol.reduction_half_ulp,
                  printed + tol.reduction_half_ulp);
}

bool reduction_consistent_from_attempts(double a_single, double a_multi,
                                        double printed,
                                        const TableTolerance& tol) {
  const double h = tol.attempts_half_ulp;
  const double lo = attempt_reduction(a_single - h, a_multi + h);
  const double hi = attempt_reduction(a_single + h, a_multi - h);
  return overlaps(lo, hi, printed - tol.reduction_half_ulp,
                  printed + tol.reduction_half_ulp);
}

}  // namespace

double expected_attempts(double discard) {
  require_probability(discard, "discard probability");
  if (discard == 1.0) return kInfiniteAttempts;
  return 1.0 / (1.0 - discard);
}

StageStats stage_stats(double discard) {
  return {discard, expected_attempts(discard), 1.0 - discard};
}

double iid_multiplex_discard(double single_site_discard, int k) {
  require_probability(single_site_discard, "discard probability");
  if (k < 1) throw DomainError("site count must be positive");
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= single_site_discard;
  return out;
}

double attempt_reduction(double baseline_attempts,
                         double multiplexed_attempts) {
  if (!(baseline_attempts > 0.0) || !(multiplexed_attempts > 0.0)) {
    throw DomainError("attempt counts must be positive");
  }
  if (std::isinf(baseline_attempts)) {
    if (std::isinf(multiplexed_attempts)) {
      throw DomainError("reduction undefined when both attempt counts are infinite");
    }
    return 100.0;
  }
  return (1.0 - multiplexed_attempts / baseline_attempts) * 100.0;
}

FailureModel FailureModel::independent(std::vector<double> per_site_fail) {
  FailureModel m;
  m.k = static_cast<int>(per_site_fail.size());
  m.per_site_fail = std::move(per_site_fail);
  m.correlation = Independent{};
  return m;
}

FailureModel FailureModel::identical(int k, double fail) {
  return independent(std::vector<double>(static_cast<std::size_t>(std::max(k, 0)), fail));
}

double FailureModel::mean_fail() const {
  if (per_site_fail.empty()) return 0.0;
  return std::accumulate(per_site_fail.begin(), per_site_fail.end(), 0.0) /
         static_cast<double>(per_site_fail.size());
}

std::vector<double> product_joint_table(
    const std::vector<double>& per_site_fail) {
  const std::size_t k = per_site_fail.size();
  if (k > static_cast<std::size_t>(kMaxJointSites)) {
    throw ModelError("joint tables support at most 20 sites");
  }
  std::vector<double> table(std::size_t{1} << k, 1.0);
  for (std::size_t pattern = 0; pattern < table.size(); ++pattern) {
    for (std::size_t i = 0; i < k; ++i) {
      table[pattern] *= ((pattern >> i) & 1u) ? per_site_fail[i]
                                               : 1.0 - per_site_fail[i];
    }
  }
  return table;
}

std::vector<double> joint_marginals(const std::vector<double>& table, int k) {
  std::vector<double> marginals(static_cast<std::size_t>(k), 0.0);
  for (std::size_t pattern = 0; pattern < table.size(); ++pattern) {
    for (int i = 0; i < k; ++i) {
      if ((pattern >> i) & 1u) marginals[i] += table[pattern];
    }
  }
  return marginals;
}

void validate(const FailureModel& model) {
  if (model.k < 1 || model.k > 64) {
    throw ModelError("site count must be in [1, 64]");
  }
  if (model.per_site_fail.size() != static_cast<std::size_t>(model.k)) {
    throw ModelError("per-site failure vector has " +
                     std::to_string(model.per_site_fail.size()) +
                     " entries for k = " + std::to_string(model.k));
  }
  for (double d : model.per_site_fail) {
    if (!is_probability(d)) {
      throw ModelError("per-site failure probability " + std::to_string(d) +
                       " outside [0, 1]");
    }
  }
  if (const auto* cm = std::get_if<CommonMode>(&model.correlation)) {
    if (!is_probability(cm->c)) {
      throw ModelError("common-mode weight must lie in [0, 1]");
    }
  } else if (const auto* joint = std::get_if<ExplicitJoint>(&model.correlation)) {
    if (model.k > kMaxJointSites) {
      throw ModelError("joint tables support at most 20 sites");
    }
    if (joint->table.size() != (std::size_t{1} << model.k)) {
      throw ModelError("joint table needs 2^k = " +
                       std::to_string(std::size_t{1} << model.k) + " entries");
    }
    double sum = 0.0;
    for (double v : joint->table) {
      if (!(v >= 0.0)) throw ModelError("joint table has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kJointSumTolerance) {
      throw ModelError("joint table sums to " + std::to_string(sum));
    }
    const auto marginals = joint_marginals(joint->table, model.k);
    for (int i = 0; i < model.k; ++i) {
      if (std::abs(marginals[i] - model.per_site_fail[i]) >
          kJointMarginalTolerance) {
        throw ModelError("joint table marginal of site " +
                         std::to_string(i + 1) +
                         " disagrees with per-site failure rate");
      }
    }
  }
}

double all_fail_probability(const FailureModel& model) {
  validate(model);
  double product = 1.0;
  for (double d : model.per_site_fail) product *= d;
  return std::visit(
      [&](const auto& corr) -> double {
        using T = std::decay_t<decltype(corr)>;
        if constexpr (std::is_same_v<T, Independent>) {
          return product;
        } else if constexpr (std::is_same_v<T, CommonMode>) {
          return corr.c * model.mean_fail() + (1.0 - corr.c) * product;
        } else {
          return corr.table.back();
        }
      },
      model.correlation);
}

double multiplex_pass_probability(const FailureModel& model) {
  return 1.0 - all_fail_probability(model);
}

bool TableRowResult::all_within_relative() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ReferenceCheck& c) { return c.within_relative; });
}

bool TableRowResult::all_rounding_consistent() const {
  return std::all_of(checks.begin(), checks.end(), [](const ReferenceCheck& c) {
    return c.rounding_consistent;
  });
}

std::vector<TableRowResult> reproduce_table(const std::vector<TableRow>& rows,
                                            int sites,
                                            const TableTolerance& tol) {
  std::vector<TableRowResult> out;
  out.reserve(rows.size());
  for (const TableRow& row : rows) {
    TableRowResult r;
    r.input = row;
    try {
      const bool have_discards = row.discard_single && row.discard_multi;
      const bool have_attempts = row.attempts_single && row.attempts_multi;
      if (!have_discards && !have_attempts) {
        throw DomainError("row needs both discard columns or both attempt columns");
      }
      if (have_discards) {
        r.single = stage_stats(*row.discard_single);
        r.multi = stage_stats(*row.discard_multi);
        r.iid_estimate = iid_multiplex_discard(*row.discard_single, sites);
        r.iid_residual = *row.discard_multi - *r.iid_estimate;
        if (row.attempts_single) {
          r.checks.push_back(make_check(
              "A1", *row.attempts_single, r.single->attempts, tol.relative,
              attempts_consistent(*row.discard_single, *row.attempts_single, tol)));
        }
        if (row.attempts_multi) {
          r.checks.push_back(make_check(
              "A" + std::to_string(sites), *row.attempts_multi,
              r.multi->attempts, tol.relative,
              attempts_consistent(*row.discard_multi, *row.attempts_multi, tol)));
        }
        if (!(std::isinf(r.single->attempts) && std::isinf(r.multi->attempts))) {
          r.reduction_pct =
              attempt_reduction(r.single->attempts, r.multi->attempts);
        }
        if (have_attempts) {
          r.reduction_from_printed_attempts_pct =
              attempt_reduction(*row.attempts_single, *row.attempts_multi);
        }
        if (row.reduction_pct && r.reduction_pct) {
          r.checks.push_back(make_check(
              "rho", *row.reduction_pct, *r.reduction_pct, tol.relative,
              reduction_consistent_from_discards(*row.discard_single,
                                                 *row.discard_multi,
                                                 *row.reduction_pct, tol)));
        }
      } else {
        if (*row.attempts_single < 1.0 || *row.attempts_multi < 1.0) {
          throw DomainError("expected attempts must be at least 1");
        }
        r.single = StageStats{1.0 - 1.0 / *row.attempts_single,
                              *row.attempts_single, 1.0 / *row.attempts_single};
        r.multi = StageStats{1.0 - 1.0 / *row.attempts_multi,
                             *row.attempts_multi, 1.0 / *row.attempts_multi};
        r.reduction_pct =
            attempt_reduction(*row.attempts_single, *row.attempts_multi);
        if (row.reduction_pct) {
          r.checks.push_back(make_check(
              "rho", *row.reduction_pct, *r.reduction_pct, tol.relative,
              reduction_consistent_from_attempts(*row.attempts_single,
                                                 *row.attempts_multi,
                                                 *row.reduction_pct, tol)));
        }
      }
    } catch (const std::exception& e) {
      r.error = e.what();
      r.single.reset();
      r.multi.reset();
      r.reduction_pct.reset();
      r.reduction_from_printed_attempts_pct.reset();
      r.iid_estimate.reset();
      r.iid_residual.reset();
      r.checks.clear();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace msmux
