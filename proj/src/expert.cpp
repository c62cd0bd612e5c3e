#include "seqdiscover/expert.hpp"

#include <algorithm>
#include <cmath>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {
namespace {

// Stable score ordering: descending score, ties by ascending id.
template <typename Score>
void order_by(std::vector<const RoundRecommendation::Entry*>& v, Score score) {
  std::sort(v.begin(), v.end(), [&](const auto* a, const auto* b) {
    double sa = score(*a->rec), sb = score(*b->rec);
    if (sa != sb) return sa > sb;
    return a->rec->id < b->rec->id;
  });
}

}  // namespace

void ExpertProfile::validate() const {
  if (!(knowledge_p >= 0.0 && knowledge_p <= 1.0))
    throw ConfigInvalid("expert knowledge probability must lie in [0, 1]");
  if (!(split_lo >= 0.0 && split_lo <= 1.0) ||
      !(split_hi >= 0.0 && split_hi <= 1.0))
    throw ConfigInvalid("split fractions must lie in [0, 1]");
}

void disclose(const Corpus& corpus, const std::vector<std::string>& ids,
              double p, Disclosure& cache, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw OutOfRange("disclosure probability must lie in [0, 1]");
  for (const auto& id : ids) {
    if (cache.decided.count(id)) continue;  // rolled once, frozen after
    cache.decided.insert(id);
    if (rng.bernoulli(p)) cache.known.emplace(id, corpus.true_labels(id));
  }
}

std::vector<RoundRecommendation::Entry> RoundRecommendation::union_entries()
    const {
  std::set<std::string> in_search, in_unc;
  for (const auto& r : search_batch) in_search.insert(r.id);
  for (const auto& r : uncertainty_batch) in_unc.insert(r.id);
  std::vector<Entry> out;
  out.reserve(search_batch.size() + uncertainty_batch.size());
  for (const auto& r : search_batch)
    out.push_back({&r, in_unc.count(r.id) ? "both" : "search"});
  for (const auto& r : uncertainty_batch)
    if (!in_search.count(r.id)) out.push_back({&r, "uncertainty"});
  return out;
}

std::vector<std::string> RoundRecommendation::union_ids() const {
  std::set<std::string> ids;
  for (const auto& r : search_batch) ids.insert(r.id);
  for (const auto& r : uncertainty_batch) ids.insert(r.id);
  return {ids.begin(), ids.end()};
}

double split_at(const ExpertProfile& profile, int t, int R) {
  if (t < 1 || t > R) throw OutOfRange("round index outside [1, R]");
  double f;
  if (profile.split_kind == ExpertProfile::SplitKind::Const) {
    f = profile.split_lo;
  } else if (R == 1) {
    f = profile.split_hi;  // degenerate single-round run: go straight to hi
  } else {
    f = profile.split_lo +
        (profile.split_hi - profile.split_lo) * double(t - 1) / double(R - 1);
  }
  return std::clamp(f, 0.0, 1.0);
}

std::vector<std::string> simulated_select(const RoundRecommendation& rec,
                                          const Disclosure& disclosure,
                                          const ExpertProfile& profile,
                                          const TargetSpec& target, int B,
                                          int t, int R, Rng& rng) {
  profile.validate();
  const auto entries = rec.union_entries();
  if (B < 0 || std::size_t(B) > entries.size())
    throw BudgetExceedsUnion("B exceeds the recommendation union");

  auto is_search_side = [](const RoundRecommendation::Entry& e) {
    return e.batch != "uncertainty";
  };

  std::vector<std::string> selected;
  std::set<std::string> taken;
  std::size_t search_count = 0;
  auto take = [&](const RoundRecommendation::Entry& e) {
    selected.push_back(e.rec->id);
    taken.insert(e.rec->id);
    if (is_search_side(e)) ++search_count;
  };

  // (1) Disclosed true targets, ascending id.
  std::vector<const RoundRecommendation::Entry*> targets;
  for (const auto& e : entries) {
    auto it = disclosure.known.find(e.rec->id);
    if (it != disclosure.known.end() && is_target(it->second, target))
      targets.push_back(&e);
  }
  std::sort(targets.begin(), targets.end(),
            [](const auto* a, const auto* b) { return a->rec->id < b->rec->id; });
  for (const auto* e : targets) {
    if (selected.size() == std::size_t(B)) break;
    take(*e);
  }

  // Undisclosed candidates, split by side. Disclosed non-targets wait for
  // the last resort.
  std::vector<const RoundRecommendation::Entry*> search_c, unc_c, non_targets;
  for (const auto& e : entries) {
    if (taken.count(e.rec->id)) continue;
    if (disclosure.is_disclosed(e.rec->id)) {
      non_targets.push_back(&e);
      continue;
    }
    (is_search_side(e) ? search_c : unc_c).push_back(&e);
  }
  if (profile.meta_visible) {
    order_by(search_c, [](const PredictionRecord& r) { return r.r_se; });
    order_by(unc_c, [](const PredictionRecord& r) { return r.r_un; });
  } else {
    rng.shuffle(search_c);
    rng.shuffle(unc_c);
  }

  // (2) Search-batch fills until the round's split quota is met.
  const auto quota =
      std::size_t(std::lround(split_at(profile, t, R) * double(B)));
  std::size_t si = 0;
  while (selected.size() < std::size_t(B) && search_count < quota &&
         si < search_c.size())
    take(*search_c[si++]);

  // (3) Uncertainty-batch fills, then any leftover search candidates; a
  // disclosed non-target is picked only when nothing undisclosed remains.
  for (std::size_t i = 0; i < unc_c.size() && selected.size() < std::size_t(B);
       ++i)
    take(*unc_c[i]);
  while (selected.size() < std::size_t(B) && si < search_c.size())
    take(*search_c[si++]);
  std::sort(non_targets.begin(), non_targets.end(),
            [](const auto* a, const auto* b) { return a->rec->id < b->rec->id; });
  for (std::size_t i = 0;
       i < non_targets.size() && selected.size() < std::size_t(B); ++i)
    take(*non_targets[i]);

  return selected;
}

}  // namespace seqdiscover
