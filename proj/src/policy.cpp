#include "seqdiscover/policy.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {
namespace {

double mu_sum(const PredictionRecord& r) {
  return std::accumulate(r.mu.begin(), r.mu.end(), 0.0);
}

// Descending by key with ascending-id ties, returning the first B ids.
template <typename Key>
std::vector<std::string> best_by(const std::vector<const PredictionRecord*>& v,
                                 int B, Key key) {
  std::vector<const PredictionRecord*> order = v;
  std::partial_sort(order.begin(), order.begin() + B, order.end(),
                    [&](const PredictionRecord* a, const PredictionRecord* b) {
                      double ka = key(*a), kb = key(*b);
                      if (ka != kb) return ka > kb;
                      return a->id < b->id;
                    });
  std::vector<std::string> ids;
  ids.reserve(std::size_t(B));
  for (int i = 0; i < B; ++i) ids.push_back(order[std::size_t(i)]->id);
  return ids;
}

std::vector<std::string> random_batch(const PoolState& state, int B, Rng& rng) {
  std::vector<std::string> pool(state.unlabeled.begin(),
                                state.unlabeled.end());
  auto idx = rng.sample_indices(pool.size(), std::size_t(B));
  std::vector<std::string> ids;
  ids.reserve(std::size_t(B));
  for (auto i : idx) ids.push_back(pool[i]);
  return ids;
}

std::vector<std::string> human_first_batch(const PoolState& state,
                                           const std::vector<PredictionRecord>& preds,
                                           int B, const DelegationHooks& hooks) {
  // The human goes first, but with the same attention budget the framework
  // gives them: q + h molecules examined per round, here an unguided
  // uniform sample because no recommendation exists yet.
  std::vector<std::string> pool(state.unlabeled.begin(),
                                state.unlabeled.end());
  const std::size_t budget =
      std::min(pool.size(), std::size_t(hooks.q + hooks.h));
  auto idx = hooks.expert_rng->sample_indices(pool.size(), budget);
  std::vector<std::string> examined;
  examined.reserve(budget);
  for (auto i : idx) examined.push_back(pool[i]);
  std::sort(examined.begin(), examined.end());
  disclose(*hooks.corpus, examined, hooks.profile->knowledge_p, *hooks.cache,
           *hooks.disclose_rng);

  // Pre-select 2B: disclosed targets first, then a uniform fill, disclosed
  // non-targets as a last resort.
  const std::size_t pre_n = std::min(examined.size(), std::size_t(2 * B));
  std::vector<std::string> pre, fill, last;
  for (const auto& id : examined) {
    auto it = hooks.cache->known.find(id);
    if (it == hooks.cache->known.end()) fill.push_back(id);
    else if (is_target(it->second, *hooks.target)) pre.push_back(id);
    else last.push_back(id);
  }
  if (pre.size() > pre_n) pre.resize(pre_n);
  hooks.expert_rng->shuffle(fill);
  for (std::size_t i = 0; i < fill.size() && pre.size() < pre_n; ++i)
    pre.push_back(fill[i]);
  for (std::size_t i = 0; i < last.size() && pre.size() < pre_n; ++i)
    pre.push_back(last[i]);

  // The algorithm keeps the top B of the pre-selection by predicted mean.
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : preds) by_id.emplace(r.id, &r);
  std::vector<const PredictionRecord*> cand;
  cand.reserve(pre.size());
  for (const auto& id : pre) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw InvalidSpec("predictions do not cover the pre-selection");
    cand.push_back(it->second);
  }
  return best_by(cand, B, mu_sum);
}

}  // namespace

int PolicySpec::resolved_switch_round(int R) const {
  int s = switch_round > 0 ? switch_round : (R + 1) / 2;
  if (s < 1 || s > R)
    throw ConfigInvalid("switch_round must lie in [1, R]");
  return s;
}

PolicyKind policy_from_name(const std::string& name) {
  if (name == "random") return PolicyKind::Random;
  if (name == "pure") return PolicyKind::PureSearch;
  if (name == "al") return PolicyKind::ActiveLearning;
  if (name == "ucb") return PolicyKind::Ucb;
  if (name == "rd-ucb") return PolicyKind::RandomThenUcb;
  if (name == "al-ucb") return PolicyKind::AlThenUcb;
  if (name == "hil") return PolicyKind::HumanInLoop;
  if (name == "human-first") return PolicyKind::HumanFirstDelegation;
  throw ConfigInvalid("unknown policy: " + name);
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Random: return "random";
    case PolicyKind::PureSearch: return "pure";
    case PolicyKind::ActiveLearning: return "al";
    case PolicyKind::Ucb: return "ucb";
    case PolicyKind::RandomThenUcb: return "rd-ucb";
    case PolicyKind::AlThenUcb: return "al-ucb";
    case PolicyKind::HumanInLoop: return "hil";
    case PolicyKind::HumanFirstDelegation: return "human-first";
  }
  throw ConfigInvalid("unknown policy kind");
}

bool policy_needs_expert(PolicyKind kind) {
  return kind == PolicyKind::HumanInLoop ||
         kind == PolicyKind::HumanFirstDelegation;
}

std::vector<std::string> select_batch(const PolicySpec& spec, int t, int R,
                                      const PoolState& state,
                                      const std::vector<PredictionRecord>& preds,
                                      int B, Rng& rng,
                                      const DelegationHooks* hooks) {
  if (B < 0 || std::size_t(B) > state.unlabeled.size())
    throw BudgetExceedsPool("B exceeds the unlabeled pool");
  if (B == 0) return {};

  PolicyKind kind = spec.kind;
  if (kind == PolicyKind::RandomThenUcb)
    kind = t < spec.resolved_switch_round(R) ? PolicyKind::Random
                                             : PolicyKind::Ucb;
  else if (kind == PolicyKind::AlThenUcb)
    kind = t < spec.resolved_switch_round(R) ? PolicyKind::ActiveLearning
                                             : PolicyKind::Ucb;

  if (policy_needs_expert(kind)) {
    if (!hooks || !hooks->corpus || !hooks->target || !hooks->profile ||
        !hooks->cache || !hooks->disclose_rng || !hooks->expert_rng)
      throw ConfigInvalid("delegation policies need the expert context");
    if (kind == PolicyKind::HumanFirstDelegation)
      return human_first_batch(state, preds, B, *hooks);
    if (!hooks->recommendation)
      throw ConfigInvalid("human-in-the-loop needs a round recommendation");
    disclose(*hooks->corpus, hooks->recommendation->union_ids(),
             hooks->profile->knowledge_p, *hooks->cache, *hooks->disclose_rng);
    return simulated_select(*hooks->recommendation, *hooks->cache,
                            *hooks->profile, *hooks->target, B, t, R,
                            *hooks->expert_rng);
  }

  if (kind == PolicyKind::Random) return random_batch(state, B, rng);

  std::vector<const PredictionRecord*> cand;
  cand.reserve(preds.size());
  for (const auto& r : preds)
    if (state.unlabeled.count(r.id)) cand.push_back(&r);
  if (std::size_t(B) > cand.size())
    throw BudgetExceedsPool("predictions cover fewer ids than B");

  switch (kind) {
    case PolicyKind::PureSearch: return best_by(cand, B, mu_sum);
    case PolicyKind::ActiveLearning:
      return best_by(cand, B, [](const PredictionRecord& r) { return r.r_un; });
    case PolicyKind::Ucb:
      return best_by(cand, B, [](const PredictionRecord& r) { return r.r_se; });
    default:
      throw ConfigInvalid("unhandled policy kind");
  }
}

}  // namespace seqdiscover
