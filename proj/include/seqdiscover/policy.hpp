#pragma once
// The benchmark selection policies plus the two human-delegation variants.
// The six algorithmic policies are pure functions of (pool, predictions,
// rng); the delegation variants additionally need the expert machinery,
// which the engine supplies through DelegationHooks.

#include <optional>
#include <string>
#include <vector>

#include "seqdiscover/expert.hpp"

namespace seqdiscover {

enum class PolicyKind {
  Random,
  PureSearch,
  ActiveLearning,
  Ucb,
  RandomThenUcb,
  AlThenUcb,
  HumanInLoop,
  HumanFirstDelegation,
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::Ucb;
  int switch_round = 0;  // Then-variants; 0 resolves to ceil(R / 2)

  int resolved_switch_round(int R) const;
};

// Config / CLI names: random, pure, al, ucb, rd-ucb, al-ucb, hil,
// human-first.
PolicyKind policy_from_name(const std::string& name);
std::string policy_name(PolicyKind kind);
bool policy_needs_expert(PolicyKind kind);

// Everything the delegation variants need beyond the predictions: the
// corpus (label lookups for disclosure), the expert profile and its frozen
// disclosure cache, the round recommendation, and the run shape.
struct DelegationHooks {
  const Corpus* corpus = nullptr;
  const TargetSpec* target = nullptr;
  const ExpertProfile* profile = nullptr;
  Disclosure* cache = nullptr;
  const RoundRecommendation* recommendation = nullptr;  // HumanInLoop
  int q = 0, h = 0;
  // Disclosure rolls on a separate stream from selection so repeating a
  // round's selection (cache already decided) replays identically.
  Rng* disclose_rng = nullptr;
  Rng* expert_rng = nullptr;
};

// Returns exactly B distinct unlabeled ids. Predictions must cover the
// unlabeled pool for every score-driven policy.
std::vector<std::string> select_batch(const PolicySpec& spec, int t, int R,
                                      const PoolState& state,
                                      const std::vector<PredictionRecord>& preds,
                                      int B, Rng& rng,
                                      const DelegationHooks* hooks = nullptr);

}  // namespace seqdiscover
