#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace msmux {

// Sites are numbered 1..k throughout the public API.
inline constexpr int kMaxSites = 64;
inline constexpr int kDefaultSites = 4;

// Per-site early-stage indicators of one shot, packed as bit masks (bit i-1
// for site i). A site that failed injection never cultivates, so `cult`
// implies `inj`.
class SiteIndicators {
 public:
  // Throws InvalidIndicators when cult has a bit that inj lacks, or when a
  // mask has bits at or above k.
  SiteIndicators(int k, std::uint64_t inj, std::uint64_t cult);
  // Forces cult to 0 wherever inj is 0.
  static SiteIndicators canonical(int k, std::uint64_t inj, std::uint64_t cult);
  // Bit vectors given as 0/1 entries, site 1 first.
  static SiteIndicators from_bits(const std::vector<int>& inj,
                                  const std::vector<int>& cult);

  int k() const { return k_; }
  std::uint64_t injection_mask() const { return inj_; }
  std::uint64_t cultivation_mask() const { return cult_; }
  std::uint64_t survival_mask() const { return inj_ & cult_; }
  bool survived(int site) const;

  friend bool operator==(const SiteIndicators&, const SiteIndicators&) = default;

 private:
  SiteIndicators(int k, std::uint64_t inj, std::uint64_t cult, bool);
  int k_;
  std::uint64_t inj_;
  std::uint64_t cult_;
};

class CandidateSet {
 public:
  CandidateSet(int k, std::uint64_t mask);

  int k() const { return k_; }
  std::uint64_t mask() const { return mask_; }
  bool empty() const { return mask_ == 0; }
  int size() const;
  bool contains(int site) const;
  std::vector<int> members() const;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;

 private:
  int k_;
  std::uint64_t mask_;
};

class SelectionRule {
 public:
  enum class Kind { LowestIndex, FixedPriority };

  static SelectionRule lowest_index();
  // `priority` lists every site 1..k exactly once, most preferred first.
  // Throws std::invalid_argument otherwise.
  static SelectionRule fixed_priority(std::vector<int> priority);

  Kind kind() const { return kind_; }
  const std::vector<int>& priority() const { return priority_; }

  friend bool operator==(const SelectionRule&, const SelectionRule&) = default;

 private:
  SelectionRule(Kind kind, std::vector<int> priority)
      : kind_(kind), priority_(std::move(priority)) {}
  Kind kind_;
  std::vector<int> priority_;
};

struct ShotOutcome {
  SiteIndicators indicators;
  CandidateSet candidates;
  std::optional<int> selected;
  std::uint64_t continuation = 0;  // eta, one bit per site
  std::optional<bool> escape_kept;

  bool discarded() const { return !selected.has_value(); }
  bool kept() const { return escape_kept.value_or(false); }
};

CandidateSet form_candidate_set(const SiteIndicators& indicators);

// nullopt is the shot-discard signal for an empty candidate set. A
// FixedPriority rule sized for a different k throws std::invalid_argument.
std::optional<int> select_candidate(const CandidateSet& candidates,
                                    const SelectionRule& rule);

// Throws ContractError when `escape_verdict` is given for a discarded shot or
// missing for a surviving one.
ShotOutcome complete_shot(const SiteIndicators& indicators,
                          const SelectionRule& rule,
                          std::optional<bool> escape_verdict);

}  // namespace msmux
