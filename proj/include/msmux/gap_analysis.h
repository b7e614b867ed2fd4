#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msmux {

enum class RecordSource { Ingested, Synthetic };

// Escape result of one kept candidate: the decoder gap |w0 - w1| and whether
// the decoded output was correct.
struct ShotRecord {
  double gap = 0.0;
  bool correct = true;
  RecordSource source = RecordSource::Ingested;
  // Attempts spent since the previous kept shot, this one included.
  std::optional<std::uint64_t> attempts_consumed;

  friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

struct RecordSet {
  std::vector<ShotRecord> records;
  std::uint64_t n_attempts = 1;  // every attempt, discarded shots included

  // Throws std::invalid_argument on a negative or NaN gap, n_attempts == 0 or
  // more records than attempts.
  void validate() const;
};

struct SweepPoint {
  double threshold = 0.0;
  // Observed counts for measured points. Extrapolated points carry the
  // fitted (fractional) error count.
  double kept_correct = 0.0;
  double kept_error = 0.0;
  std::optional<double> attempts;       // A(G); nullopt when nothing is kept
  std::optional<double> logical_error;  // p_L(G); nullopt when nothing is kept
  bool extrapolated = false;
  // Uncertainty band on the error count of extrapolated points.
  std::optional<double> error_lower;
  std::optional<double> error_upper;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  std::optional<double> extrapolated_from;
  std::vector<std::string> warnings;
};

// Counts kept shots (gap >= G) at each threshold. Thresholds must be strictly
// increasing and finite; std::invalid_argument otherwise.
SweepCurve sweep(const RecordSet& records, std::span<const double> thresholds);

// Concatenates curves computed on consecutive disjoint threshold ranges.
SweepCurve merge_curves(std::span<const SweepCurve> parts);

// Builds a curve from externally supplied (G, p_L) samples; nullopt marks an
// undefined point.
SweepCurve curve_from_logical_error(
    std::span<const double> thresholds,
    std::span<const std::optional<double>> logical_error);

// 0, every distinct observed gap, and max gap + 1.
std::vector<double> default_threshold_grid(const RecordSet& records);
// lo, lo + step, ... up to and including hi (within step / 2).
std::vector<double> uniform_threshold_grid(double lo, double hi, double step);

struct CumulativeFractions {
  std::vector<double> thresholds;
  std::vector<double> correct;  // count{correct, gap >= G} / n_attempts
  std::vector<double> error;    // count{error, gap >= G} / n_attempts
};

CumulativeFractions cumulative_fractions(const RecordSet& records,
                                         std::span<const double> thresholds);

struct Crossing {
  double threshold = 0.0;  // G*
  double lower = 0.0;      // bracketing grid points
  double upper = 0.0;
};

// Smallest threshold where p_L(a) - p_L(b) changes strict sign between
// adjacent defined points, linearly interpolated. Undefined points break
// brackets. Throws std::invalid_argument when the grids differ.
std::optional<Crossing> find_crossing(const SweepCurve& a, const SweepCurve& b);

struct TailFit {
  double slope = 0.0;            // d ln(error count) / dG
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double window_mean = 0.0;      // band pivots about the mean fitted threshold
  std::size_t points_used = 0;
  double rate() const { return -slope; }
  double predict(double threshold) const;
  double lower(double threshold) const;
  double upper(double threshold) const;
};

struct TailExtrapolation {
  TailFit fit;
  // Input curve with every point past the last observed error replaced by
  // the fitted estimate (and extra thresholds appended), flagged
  // extrapolated.
  SweepCurve curve;
};

struct TailResult {
  std::optional<TailExtrapolation> extrapolation;
  std::string diagnostic;
};

inline constexpr std::size_t kMinTailPoints = 3;

// Log-linear least-squares fit of the error-survival counts over points with
// threshold in [window_lo, window_hi] and kept_error >= 1. `n_attempts` turns
// estimated counts back into A(G). Extra thresholds beyond the curve may be
// passed in `extend_to`.
TailResult extrapolate_tail(const SweepCurve& curve, double window_lo,
                            double window_hi, std::uint64_t n_attempts,
                            std::span<const double> extend_to = {});

}  // namespace msmux
