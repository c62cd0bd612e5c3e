#pragma once
// The human-expert model: probabilistic knowledge disclosure, optional
// meta-knowledge (visible scores), a budget split between the two
// recommendation batches, and the final B-molecule selection rule. The
// simulated expert here is also the behavioral contract the interactive
// HTTP session exposes to a real person.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "seqdiscover/corpus.hpp"
#include "seqdiscover/rng.hpp"
#include "seqdiscover/scoring.hpp"

namespace seqdiscover {

struct ExpertProfile {
  double knowledge_p = 0.0;  // probability a molecule's labels are disclosed
  bool meta_visible = true;  // scores shown alongside recommendations

  // Fraction of B drawn from the search batch; the rest comes from the
  // uncertainty batch. Ramp interpolates lo -> hi over the R rounds.
  enum class SplitKind { Ramp, Const };
  SplitKind split_kind = SplitKind::Ramp;
  double split_lo = 0.3;
  double split_hi = 1.0;

  void validate() const;
};

// Knowledge state: disclosure is rolled once per id and then frozen, so the
// simulated human cannot re-roll what it knows across rounds.
struct Disclosure {
  std::map<std::string, LabelVector> known;  // disclosed ids only
  std::set<std::string> decided;             // every id rolled so far

  bool is_disclosed(const std::string& id) const {
    return known.count(id) > 0;
  }
};

// Rolls disclosure for ids not seen before, each independently with
// probability p; previously decided ids keep their status.
void disclose(const Corpus& corpus, const std::vector<std::string>& ids,
              double p, Disclosure& cache, Rng& rng);

// What the algorithm shows the expert each round.
struct RoundRecommendation {
  std::vector<PredictionRecord> search_batch;       // h records, by r_se
  std::vector<PredictionRecord> uncertainty_batch;  // q records, by r_un

  // Deduplicated union, each id tagged "search" | "uncertainty" | "both".
  struct Entry {
    const PredictionRecord* rec;
    std::string batch;
  };
  std::vector<Entry> union_entries() const;
  std::vector<std::string> union_ids() const;
};

// Fraction of B taken from the search side in round t of R.
double split_at(const ExpertProfile& profile, int t, int R);

// The simulated expert's pick: disclosed targets first (ascending id),
// then search-batch fills up to the split quota (by r_se when scores are
// visible, uniformly otherwise), then uncertainty-batch fills, and
// disclosed non-targets only if nothing else is left.
std::vector<std::string> simulated_select(const RoundRecommendation& rec,
                                          const Disclosure& disclosure,
                                          const ExpertProfile& profile,
                                          const TargetSpec& target, int B,
                                          int t, int R, Rng& rng);

}  // namespace seqdiscover
