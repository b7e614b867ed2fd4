#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msmux/analytics.h"
#include "msmux/gap_analysis.h"
#include "msmux/pipeline.h"

namespace msmux {

// Distribution of the decoder gap for one class of escape outcomes.
struct GapDistribution {
  enum class Kind { Constant, Exponential, DiscretizedExponential, Uniform };
  Kind kind = Kind::DiscretizedExponential;
  double a = 0.05;  // rate (exponential kinds), value (constant), lo (uniform)
  double b = 1.0;   // step (discretized), hi (uniform); unused otherwise

  static GapDistribution constant(double value) { return {Kind::Constant, value, 0.0}; }
  static GapDistribution exponential(double rate) { return {Kind::Exponential, rate, 0.0}; }
  static GapDistribution discretized_exponential(double rate, double step) {
    return {Kind::DiscretizedExponential, rate, step};
  }
  static GapDistribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }

  // Inverse-CDF draw from u in [0, 1).
  double sample(double u) const;
  void validate() const;
  friend bool operator==(const GapDistribution&, const GapDistribution&) = default;
};

// Stand-in for the escape circuit and decoder: yields (gap, correct) for the
// selected candidate of a shot.
struct EscapeModel {
  // AlwaysKeep accepts every selected candidate regardless of the escape
  // threshold and records gap 0, correct.
  enum class Kind { AlwaysKeep, BernoulliError, Empirical };
  Kind kind = Kind::AlwaysKeep;
  double error_probability = 0.0;  // BernoulliError
  // Correct shots have larger gaps on average than erroneous ones.
  GapDistribution correct_gap = GapDistribution::discretized_exponential(0.05, 1.0);
  GapDistribution error_gap = GapDistribution::discretized_exponential(0.2, 1.0);
  std::vector<ShotRecord> pool;  // Empirical

  static EscapeModel always_keep() { return {}; }
  static EscapeModel bernoulli_error(double q) {
    EscapeModel m;
    m.kind = Kind::BernoulliError;
    m.error_probability = q;
    return m;
  }
  static EscapeModel empirical(std::vector<ShotRecord> pool) {
    EscapeModel m;
    m.kind = Kind::Empirical;
    m.pool = std::move(pool);
    return m;
  }

  // Throws ModelError.
  void validate() const;
};

// Optional injection/cultivation attribution of early-stage failures: a
// failed site is marked as an injection failure with probability
// injection_fail[i] / per_site_fail[i], otherwise as a cultivation failure.
struct StageSplit {
  std::vector<double> injection_fail;
  friend bool operator==(const StageSplit&, const StageSplit&) = default;
};

struct SimConfig {
  int d1_label = 3;
  double p_label = 0.0;
  int k = kDefaultSites;
  FailureModel failure_model = FailureModel::identical(kDefaultSites, 0.0);
  std::optional<StageSplit> stage_split;
  EscapeModel escape_model;
  SelectionRule selection = SelectionRule::lowest_index();
  // Escape acceptance: the selected candidate is kept when gap >= this.
  double escape_threshold = 0.0;
  std::uint64_t n_shots = 1;
  std::uint64_t seed = 0;
  bool keep_records = true;

  // Throws ModelError / std::invalid_argument.
  void validate() const;
};

struct ShotSample {
  ShotOutcome outcome;
  std::optional<ShotRecord> record;  // present for kept shots
};

// Pure function of (config.seed, shot_index, config).
ShotSample sample_shot(std::uint64_t shot_index, const SimConfig& config);

struct SimSummary {
  int d1_label = 3;
  double p_label = 0.0;
  int k = kDefaultSites;
  std::uint64_t seed = 0;
  std::uint64_t shots = 0;
  std::uint64_t early_discards = 0;
  std::uint64_t escape_rejections = 0;  // candidates rejected at escape
  std::uint64_t kept = 0;
  std::uint64_t kept_errors = 0;
  double empirical_D = 0.0;  // early_discards / shots
  double empirical_A = 1.0;  // shots / kept; kInfiniteAttempts when kept == 0
  bool no_kept_warning = false;
  std::vector<std::uint64_t> site_survival_histogram;  // index = |C|
  std::vector<ShotRecord> records;  // kept shots in shot order

  RecordSet record_set() const { return {records, shots}; }
  friend bool operator==(const SimSummary&, const SimSummary&) = default;
};

// Deterministic fold over shots in index order. `threads` = 0 picks the
// hardware concurrency; the result does not depend on it.
SimSummary run_simulation(const SimConfig& config, unsigned threads = 0);

// Independent model with every site failing at the table's single-site
// discard rate.
FailureModel calibrate_from_table(double single_site_discard,
                                  int k = kDefaultSites);

// Common-mode weight c whose all-fail probability equals the measured
// multi-site discard. nullopt when the target lies outside
// [prod D_i, mean D] or the interval is degenerate.
std::optional<double> fit_common_mode(const std::vector<double>& per_site_fail,
                                      double measured_all_fail);

}  // namespace msmux
