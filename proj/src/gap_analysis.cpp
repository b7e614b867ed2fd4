#include "msmux/gap_analysis.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace msmux {

namespace {

void require_increasing(std::span<const double> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!std::isfinite(thresholds[i])) {
      throw std::invalid_argument("thresholds must be finite");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw std::invalid_argument("thresholds must be strictly increasing");
    }
  }
}

std::size_t count_at_least(const std::vector<double>& sorted, double g) {
  return static_cast<std::size_t>(
      sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), g));
}

struct SortedGaps {
  std::vector<double> correct;
  std::vector<double> error;
};

SortedGaps split_sorted(const RecordSet& records) {
  SortedGaps out;
  for (const ShotRecord& r : records.records) {
    (r.correct ? out.correct : out.error).push_back(r.gap);
  }
  std::sort(out.correct.begin(), out.correct.end());
  std::sort(out.error.begin(), out.error.end());
  return out;
}

void fill_rates(SweepPoint& p, std::uint64_t n_attempts) {
  const double kept = p.kept_correct + p.kept_error;
  if (kept > 0.0) {
    p.attempts = static_cast<double>(n_attempts) / kept;
    p.logical_error = p.kept_error / kept;
  } else {
    p.attempts.reset();
    p.logical_error.reset();
  }
}

}  // namespace

void RecordSet::validate() const {
  if (n_attempts == 0) {
    throw std::invalid_argument("record set needs at least one attempt");
  }
  if (records.size() > n_attempts) {
    throw std::invalid_argument("record set has " +
                                std::to_string(records.size()) +
                                " records but only " +
                                std::to_string(n_attempts) + " attempts");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!(records[i].gap >= 0.0) || std::isinf(records[i].gap)) {
      throw std::invalid_argument("record " + std::to_string(i + 1) +
                                  " has an invalid gap");
    }
  }
}

SweepCurve sweep(const RecordSet& records, std::span<const double> thresholds) {
  records.validate();
  require_increasing(thresholds);
  SweepCurve curve;
  if (records.records.empty()) {
    curve.warnings.push_back("record set is empty; every point is undefined");
  }
  const SortedGaps gaps = split_sorted(records);
  curve.points.reserve(thresholds.size());
  for (double g : thresholds) {
    SweepPoint p;
    p.threshold = g;
    p.kept_correct = static_cast<double>(count_at_least(gaps.correct, g));
    p.kept_error = static_cast<double>(count_at_least(gaps.error, g));
    fill_rates(p, records.n_attempts);
    curve.points.push_back(p);
  }
  return curve;
}

SweepCurve merge_curves(std::span<const SweepCurve> parts) {
  SweepCurve out;
  for (const SweepCurve& part : parts) {
    for (const SweepPoint& p : part.points) {
      if (!out.points.empty() && !(p.threshold > out.points.back().threshold)) {
        throw std::invalid_argument("curve parts overlap or are out of order");
      }
      out.points.push_back(p);
    }
    for (const std::string& w : part.warnings) {
      if (std::find(out.warnings.begin(), out.warnings.end(), w) ==
          out.warnings.end()) {
        out.warnings.push_back(w);
      }
    }
  }
  return out;
}

SweepCurve curve_from_logical_error(
    std::span<const double> thresholds,
    std::span<const std::optional<double>> logical_error) {
  if (thresholds.size() != logical_error.size()) {
    throw std::invalid_argument("threshold and value counts differ");
  }
  require_increasing(thresholds);
  SweepCurve curve;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    SweepPoint p;
    p.threshold = thresholds[i];
    p.logical_error = logical_error[i];
    curve.points.push_back(p);
  }
  return curve;
}

std::vector<double> default_threshold_grid(const RecordSet& records) {
  std::vector<double> grid{0.0};
  for (const ShotRecord& r : records.records) grid.push_back(r.gap);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.push_back(grid.back() + 1.0);
  return grid;
}

std::vector<double> uniform_threshold_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw std::invalid_argument("uniform grid needs lo <= hi and step > 0");
  }
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double g = lo + static_cast<double>(i) * step;
    if (g > hi + step / 2) break;
    grid.push_back(g);
  }
  return grid;
}

CumulativeFractions cumulative_fractions(const RecordSet& records,
                                         std::span<const double> thresholds) {
  records.validate();
  require_increasing(thresholds);
  const SortedGaps gaps = split_sorted(records);
  const double n = static_cast<double>(records.n_attempts);
  CumulativeFractions out;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double g : thresholds) {
    out.correct.push_back(static_cast<double>(count_at_least(gaps.correct, g)) / n);
    out.error.push_back(static_cast<double>(count_at_least(gaps.error, g)) / n);
  }
  return out;
}

std::optional<Crossing> find_crossing(const SweepCurve& a, const SweepCurve& b) {
  if (a.points.size() != b.points.size()) {
    throw std::invalid_argument("curves are sampled on different grids");
  }
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].threshold != b.points[i].threshold) {
      throw std::invalid_argument("curves are sampled on different grids");
    }
  }
  auto diff = [&](std::size_t i) -> std::optional<double> {
    const auto& pa = a.points[i].logical_error;
    const auto& pb = b.points[i].logical_error;
    if (!pa || !pb) return std::nullopt;
    return *pa - *pb;
  };
  // `anchor` is the last defined point with a nonzero difference in the
  // current run of defined points.
  std::optional<std::size_t> anchor;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto d = diff(i);
    if (!d) {
      anchor.reset();
      continue;
    }
    if (*d == 0.0) continue;
    if (anchor) {
      const double d0 = *diff(*anchor);
      if ((d0 > 0.0) != (*d > 0.0)) {
        const double g0 = a.points[*anchor].threshold;
        const double g1 = a.points[i].threshold;
        if (*anchor + 1 == i) {
          return Crossing{g0 + (g1 - g0) * d0 / (d0 - *d), g0, g1};
        }
        // Exact zero(s) between the bracket: the first zero is the crossing.
        return Crossing{a.points[*anchor + 1].threshold, g0, g1};
      }
    }
    anchor = i;
  }
  return std::nullopt;
}

double TailFit::predict(double threshold) const {
  return std::exp(intercept + slope * threshold);
}

double TailFit::lower(double threshold) const {
  return std::exp(intercept + slope * threshold -
                  slope_stderr * std::abs(threshold - window_mean));
}

double TailFit::upper(double threshold) const {
  return std::exp(intercept + slope * threshold +
                  slope_stderr * std::abs(threshold - window_mean));
}

TailResult extrapolate_tail(const SweepCurve& curve, double window_lo,
                            double window_hi, std::uint64_t n_attempts,
                            std::span<const double> extend_to) {
  TailResult result;
  std::vector<double> xs;
  std::vector<double> ys;
  std::optional<std::size_t> last_error;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const SweepPoint& p = curve.points[i];
    if (p.extrapolated || p.kept_error < 1.0) continue;
    last_error = i;
    if (p.threshold >= window_lo && p.threshold <= window_hi) {
      xs.push_back(p.threshold);
      ys.push_back(std::log(p.kept_error));
    }
  }
  if (xs.size() < kMinTailPoints) {
    result.diagnostic = "fit window holds " + std::to_string(xs.size()) +
                        " points with at least one error; need " +
                        std::to_string(kMinTailPoints);
    return result;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  TailFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.window_mean = mx;
  fit.points_used = xs.size();
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += r * r;
  }
  fit.slope_stderr = xs.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;

  TailExtrapolation ext{fit, {}};
  ext.curve.warnings = curve.warnings;
  ext.curve.extrapolated_from = window_lo;
  auto extrapolated_point = [&](double g, double kept_correct) {
    SweepPoint p;
    p.threshold = g;
    p.kept_correct = kept_correct;
    p.kept_error = fit.predict(g);
    p.error_lower = fit.lower(g);
    p.error_upper = fit.upper(g);
    p.extrapolated = true;
    fill_rates(p, n_attempts);
    return p;
  };
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const SweepPoint& p = curve.points[i];
    if (i > *last_error) {
      ext.curve.points.push_back(extrapolated_point(p.threshold, p.kept_correct));
    } else {
      ext.curve.points.push_back(p);
    }
  }
  const double last_correct =
      curve.points.empty() ? 0.0 : curve.points.back().kept_correct;
  for (double g : extend_to) {
    if (!ext.curve.points.empty() && !(g > ext.curve.points.back().threshold)) {
      continue;
    }
    ext.curve.points.push_back(extrapolated_point(g, last_correct));
  }
  result.extrapolation = std::move(ext);
  result.diagnostic = "log-linear fit over " + std::to_string(xs.size()) +
                      " points";
  return result;
}

}  // namespace msmux
