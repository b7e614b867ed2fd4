#include "msmux/pipeline.h"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

#include "msmux/errors.h"

namespace msmux {

namespace {

std::uint64_t site_bits(int k) {
  return k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
}

void check_k(int k) {
  if (k < 1 || k > kMaxSites) {
    throw std::invalid_argument("site count must be in [1, 64], got " +
                                std::to_string(k));
  }
}

}  // namespace

SiteIndicators::SiteIndicators(int k, std::uint64_t inj, std::uint64_t cult,
                               bool)
    : k_(k), inj_(inj), cult_(cult) {}

SiteIndicators::SiteIndicators(int k, std::uint64_t inj, std::uint64_t cult)
    : k_(k), inj_(inj), cult_(cult) {
  check_k(k);
  if ((inj | cult) & ~site_bits(k)) {
    throw InvalidIndicators("indicator bits set beyond site " +
                            std::to_string(k));
  }
  if (cult & ~inj) {
    const int site = std::countr_zero(cult & ~inj) + 1;
    throw InvalidIndicators("site " + std::to_string(site) +
                            " cultivated without passing injection");
  }
}

SiteIndicators SiteIndicators::canonical(int k, std::uint64_t inj,
                                         std::uint64_t cult) {
  check_k(k);
  const std::uint64_t bits = site_bits(k);
  return SiteIndicators(k, inj & bits, cult & inj & bits, true);
}

SiteIndicators SiteIndicators::from_bits(const std::vector<int>& inj,
                                         const std::vector<int>& cult) {
  if (inj.size() != cult.size()) {
    throw InvalidIndicators("injection and cultivation vectors differ in length");
  }
  std::uint64_t inj_mask = 0;
  std::uint64_t cult_mask = 0;
  for (std::size_t i = 0; i < inj.size() && i < 64; ++i) {
    if (inj[i]) inj_mask |= std::uint64_t{1} << i;
    if (cult[i]) cult_mask |= std::uint64_t{1} << i;
  }
  return SiteIndicators(static_cast<int>(inj.size()), inj_mask, cult_mask);
}

bool SiteIndicators::survived(int site) const {
  return site >= 1 && site <= k_ && ((survival_mask() >> (site - 1)) & 1u);
}

CandidateSet::CandidateSet(int k, std::uint64_t mask) : k_(k), mask_(mask) {
  check_k(k);
  if (mask & ~site_bits(k)) {
    throw std::invalid_argument("candidate bits set beyond site " +
                                std::to_string(k));
  }
}

int CandidateSet::size() const { return std::popcount(mask_); }

bool CandidateSet::contains(int site) const {
  return site >= 1 && site <= k_ && ((mask_ >> (site - 1)) & 1u);
}

std::vector<int> CandidateSet::members() const {
  std::vector<int> out;
  for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
    out.push_back(std::countr_zero(m) + 1);
  }
  return out;
}

SelectionRule SelectionRule::lowest_index() {
  return SelectionRule(Kind::LowestIndex, {});
}

SelectionRule SelectionRule::fixed_priority(std::vector<int> priority) {
  std::vector<int> sorted = priority;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i) + 1) {
      throw std::invalid_argument(
          "priority must be a permutation of 1..k");
    }
  }
  if (sorted.empty() || sorted.size() > kMaxSites) {
    throw std::invalid_argument("priority must list between 1 and 64 sites");
  }
  return SelectionRule(Kind::FixedPriority, std::move(priority));
}

CandidateSet form_candidate_set(const SiteIndicators& indicators) {
  return CandidateSet(indicators.k(), indicators.survival_mask());
}

std::optional<int> select_candidate(const CandidateSet& candidates,
                                    const SelectionRule& rule) {
  if (rule.kind() == SelectionRule::Kind::FixedPriority &&
      static_cast<int>(rule.priority().size()) != candidates.k()) {
    throw std::invalid_argument("priority rule covers " +
                                std::to_string(rule.priority().size()) +
                                " sites, shot has " +
                                std::to_string(candidates.k()));
  }
  if (candidates.empty()) return std::nullopt;
  if (rule.kind() == SelectionRule::Kind::LowestIndex) {
    return std::countr_zero(candidates.mask()) + 1;
  }
  for (int site : rule.priority()) {
    if (candidates.contains(site)) return site;
  }
  return std::nullopt;  // unreachable: priority is a full permutation
}

ShotOutcome complete_shot(const SiteIndicators& indicators,
                          const SelectionRule& rule,
                          std::optional<bool> escape_verdict) {
  ShotOutcome out{indicators, form_candidate_set(indicators), std::nullopt, 0,
                  std::nullopt};
  out.selected = select_candidate(out.candidates, rule);
  if (!out.selected) {
    if (escape_verdict) {
      throw ContractError("escape verdict supplied for a discarded shot");
    }
    return out;
  }
  if (!escape_verdict) {
    throw ContractError("surviving shot requires an escape verdict");
  }
  out.continuation = std::uint64_t{1} << (*out.selected - 1);
  out.escape_kept = *escape_verdict;
  return out;
}

}  // namespace msmux
