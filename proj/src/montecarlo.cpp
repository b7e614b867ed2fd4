#include "msmux/montecarlo.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "msmux/counter_rng.h"
#include "msmux/errors.h"

namespace msmux {

namespace {

// Stream identifiers of the counter-based generator.
enum Stream : std::uint32_t {
  kEarlyStage = 0,
  kMixture = 1,
  kSharedFate = 2,
  kJointPattern = 3,
  kStageAttribution = 4,
  kEscapeError = 5,
  kEscapeGap = 6,
  kPoolPick = 7,
};

constexpr std::uint32_t kShotWide = 0xffffffffu;
constexpr std::uint64_t kChunkShots = std::uint64_t{1} << 16;

std::uint64_t site_bits(int k) {
  return k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
}

std::uint64_t draw_failures(const SimConfig& config, const CounterRng& rng,
                            std::uint64_t shot) {
  const FailureModel& model = config.failure_model;
  auto independent = [&] {
    std::uint64_t fail = 0;
    for (int i = 0; i < model.k; ++i) {
      if (rng.bernoulli(model.per_site_fail[i], shot, static_cast<std::uint32_t>(i),
                        kEarlyStage)) {
        fail |= std::uint64_t{1} << i;
      }
    }
    return fail;
  };
  if (const auto* cm = std::get_if<CommonMode>(&model.correlation)) {
    if (rng.bernoulli(cm->c, shot, kShotWide, kMixture)) {
      return rng.bernoulli(model.mean_fail(), shot, kShotWide, kSharedFate)
                 ? site_bits(model.k)
                 : 0;
    }
    return independent();
  }
  if (const auto* joint = std::get_if<ExplicitJoint>(&model.correlation)) {
    const double u = rng.uniform(shot, kShotWide, kJointPattern);
    double cumulative = 0.0;
    for (std::size_t pattern = 0; pattern < joint->table.size(); ++pattern) {
      cumulative += joint->table[pattern];
      if (u < cumulative) return pattern;
    }
    // Rounding left u above the summed table: take the last pattern with mass.
    for (std::size_t pattern = joint->table.size(); pattern-- > 0;) {
      if (joint->table[pattern] > 0.0) return pattern;
    }
    return 0;
  }
  return independent();
}

struct EscapeDraw {
  double gap;
  bool correct;
};

EscapeDraw draw_escape(const SimConfig& config, const CounterRng& rng,
                       std::uint64_t shot, int selected) {
  const EscapeModel& m = config.escape_model;
  const auto site = static_cast<std::uint32_t>(selected - 1);
  switch (m.kind) {
    case EscapeModel::Kind::AlwaysKeep:
      return {0.0, true};
    case EscapeModel::Kind::BernoulliError: {
      const bool error = rng.bernoulli(m.error_probability, shot, site, kEscapeError);
      const double u = rng.uniform(shot, site, kEscapeGap);
      return {(error ? m.error_gap : m.correct_gap).sample(u), !error};
    }
    case EscapeModel::Kind::Empirical: {
      const double u = rng.uniform(shot, site, kPoolPick);
      auto index = static_cast<std::size_t>(u * static_cast<double>(m.pool.size()));
      index = std::min(index, m.pool.size() - 1);
      return {m.pool[index].gap, m.pool[index].correct};
    }
  }
  return {0.0, true};
}

struct ChunkResult {
  std::uint64_t early_discards = 0;
  std::uint64_t escape_rejections = 0;
  std::uint64_t kept = 0;
  std::uint64_t kept_errors = 0;
  std::vector<std::uint64_t> histogram;
  std::vector<std::pair<std::uint64_t, ShotRecord>> records;
};

ChunkResult run_chunk(const SimConfig& config, std::uint64_t begin,
                      std::uint64_t end) {
  ChunkResult out;
  out.histogram.assign(static_cast<std::size_t>(config.k) + 1, 0);
  for (std::uint64_t shot = begin; shot < end; ++shot) {
    ShotSample s = sample_shot(shot, config);
    ++out.histogram[static_cast<std::size_t>(s.outcome.candidates.size())];
    if (s.outcome.discarded()) {
      ++out.early_discards;
    } else if (!s.outcome.kept()) {
      ++out.escape_rejections;
    } else {
      ++out.kept;
      if (!s.record->correct) ++out.kept_errors;
      if (config.keep_records) out.records.emplace_back(shot, *s.record);
    }
  }
  return out;
}

}  // namespace

double GapDistribution::sample(double u) const {
  switch (kind) {
    case Kind::Constant:
      return a;
    case Kind::Exponential:
      return -std::log1p(-u) / a;
    case Kind::DiscretizedExponential:
      return std::floor(-std::log1p(-u) / a / b) * b;
    case Kind::Uniform:
      return a + u * (b - a);
  }
  return 0.0;
}

void GapDistribution::validate() const {
  switch (kind) {
    case Kind::Constant:
      if (!(a >= 0.0) || !std::isfinite(a)) throw ModelError("constant gap must be finite and >= 0");
      break;
    case Kind::Exponential:
      if (!(a > 0.0) || !std::isfinite(a)) throw ModelError("gap rate must be positive");
      break;
    case Kind::DiscretizedExponential:
      if (!(a > 0.0) || !std::isfinite(a)) throw ModelError("gap rate must be positive");
      if (!(b > 0.0) || !std::isfinite(b)) throw ModelError("gap step must be positive");
      break;
    case Kind::Uniform:
      if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b)) {
        throw ModelError("uniform gap needs 0 <= lo <= hi");
      }
      break;
  }
}

void EscapeModel::validate() const {
  switch (kind) {
    case Kind::AlwaysKeep:
      break;
    case Kind::BernoulliError:
      if (!(error_probability >= 0.0 && error_probability <= 1.0)) {
        throw ModelError("escape error probability must lie in [0, 1]");
      }
      correct_gap.validate();
      error_gap.validate();
      break;
    case Kind::Empirical:
      if (pool.empty()) throw ModelError("empirical escape pool is empty");
      for (const ShotRecord& r : pool) {
        if (!(r.gap >= 0.0) || std::isinf(r.gap)) {
          throw ModelError("empirical pool holds an invalid gap");
        }
      }
      break;
  }
}

void SimConfig::validate() const {
  if (n_shots < 1) throw std::invalid_argument("n_shots must be at least 1");
  if (k != failure_model.k) {
    throw ModelError("config k = " + std::to_string(k) +
                     " but failure model has k = " +
                     std::to_string(failure_model.k));
  }
  msmux::validate(failure_model);
  escape_model.validate();
  if (!(escape_threshold >= 0.0) || !std::isfinite(escape_threshold)) {
    throw std::invalid_argument("escape threshold must be finite and >= 0");
  }
  if (selection.kind() == SelectionRule::Kind::FixedPriority &&
      static_cast<int>(selection.priority().size()) != k) {
    throw std::invalid_argument("priority rule does not cover all sites");
  }
  if (stage_split) {
    if (stage_split->injection_fail.size() != static_cast<std::size_t>(k)) {
      throw ModelError("stage split needs one injection rate per site");
    }
    for (int i = 0; i < k; ++i) {
      const double inj = stage_split->injection_fail[i];
      if (!(inj >= 0.0) || inj > failure_model.per_site_fail[i]) {
        throw ModelError("injection failure rate of site " +
                         std::to_string(i + 1) +
                         " must lie in [0, combined early-stage rate]");
      }
    }
  }
}

ShotSample sample_shot(std::uint64_t shot_index, const SimConfig& config) {
  if (shot_index >= config.n_shots) {
    throw std::out_of_range("shot index " + std::to_string(shot_index) +
                            " beyond n_shots");
  }
  const CounterRng rng(config.seed);
  const int k = config.k;
  const std::uint64_t fail = draw_failures(config, rng, shot_index);
  const std::uint64_t pass = ~fail & site_bits(k);

  std::uint64_t inj = pass;
  if (config.stage_split) {
    for (std::uint64_t m = fail; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      const double d = config.failure_model.per_site_fail[i];
      const double share = d > 0.0 ? config.stage_split->injection_fail[i] / d : 0.0;
      if (!rng.bernoulli(share, shot_index, static_cast<std::uint32_t>(i),
                         kStageAttribution)) {
        inj |= std::uint64_t{1} << i;  // reached cultivation, failed there
      }
    }
  }
  const SiteIndicators indicators(k, inj, pass);
  const CandidateSet candidates = form_candidate_set(indicators);
  const std::optional<int> selected = select_candidate(candidates, config.selection);

  if (!selected) {
    return ShotSample{complete_shot(indicators, config.selection, std::nullopt),
                      std::nullopt};
  }

  const EscapeDraw escape = draw_escape(config, rng, shot_index, *selected);
  const bool kept = config.escape_model.kind == EscapeModel::Kind::AlwaysKeep ||
                    escape.gap >= config.escape_threshold;
  ShotSample out{complete_shot(indicators, config.selection, kept), std::nullopt};
  if (kept) {
    out.record = ShotRecord{escape.gap, escape.correct, RecordSource::Synthetic,
                            std::nullopt};
  }
  return out;
}

SimSummary run_simulation(const SimConfig& config, unsigned threads) {
  config.validate();
  const std::uint64_t n_chunks = (config.n_shots + kChunkShots - 1) / kChunkShots;
  std::vector<ChunkResult> chunks(n_chunks);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n_chunks, 1)));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t c = next++; c < n_chunks; c = next++) {
      const std::uint64_t begin = c * kChunkShots;
      chunks[c] = run_chunk(config, begin,
                            std::min(config.n_shots, begin + kChunkShots));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  SimSummary s;
  s.d1_label = config.d1_label;
  s.p_label = config.p_label;
  s.k = config.k;
  s.seed = config.seed;
  s.shots = config.n_shots;
  s.site_survival_histogram.assign(static_cast<std::size_t>(config.k) + 1, 0);
  std::uint64_t previous_kept_end = 0;  // shots consumed through last kept shot
  for (ChunkResult& c : chunks) {
    s.early_discards += c.early_discards;
    s.escape_rejections += c.escape_rejections;
    s.kept += c.kept;
    s.kept_errors += c.kept_errors;
    for (std::size_t i = 0; i < c.histogram.size(); ++i) {
      s.site_survival_histogram[i] += c.histogram[i];
    }
    for (auto& [shot, record] : c.records) {
      record.attempts_consumed = shot + 1 - previous_kept_end;
      previous_kept_end = shot + 1;
      s.records.push_back(record);
    }
  }
  s.empirical_D = static_cast<double>(s.early_discards) / static_cast<double>(s.shots);
  if (s.kept == 0) {
    s.empirical_A = kInfiniteAttempts;
    s.no_kept_warning = true;
  } else {
    s.empirical_A = static_cast<double>(s.shots) / static_cast<double>(s.kept);
  }
  return s;
}

FailureModel calibrate_from_table(double single_site_discard, int k) {
  if (!(single_site_discard >= 0.0 && single_site_discard <= 1.0)) {
    throw DomainError("single-site discard must lie in [0, 1]");
  }
  return FailureModel::identical(k, single_site_discard);
}

std::optional<double> fit_common_mode(const std::vector<double>& per_site_fail,
                                      double measured_all_fail) {
  FailureModel m = FailureModel::independent(per_site_fail);
  validate(m);
  const double product = all_fail_probability(m);
  const double mean = m.mean_fail();
  if (!(mean > product)) return std::nullopt;
  if (measured_all_fail < product || measured_all_fail > mean) return std::nullopt;
  return (measured_all_fail - product) / (mean - product);
}

}  // namespace msmux
