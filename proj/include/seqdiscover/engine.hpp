#pragma once
// Round-loop orchestration: predict -> score -> recommend -> select ->
// reveal -> retrain, with metrics, replication, and result persistence.
// SequentialRun exposes the loop stepwise so the batch driver and the
// interactive HTTP session share one code path; a session transcript
// replayed through submit() reproduces the batch results exactly.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqdiscover/policy.hpp"

namespace seqdiscover {

enum class RetrainMode { Warm, Fresh };

struct RunConfig {
  int B = 20, R = 20, q = 20, h = 20;
  std::size_t n_test = 0;
  std::uint64_t seed = 1;

  EncoderSpec encoder;
  std::vector<int> hidden = {24, 12};
  double prior_std = 0.1;
  TrainConfig train;
  int mc_samples = 30;  // posterior draws per prediction
  BetaSchedule beta;
  PolicySpec policy;
  ExpertProfile expert;
  RetrainMode retrain = RetrainMode::Warm;

  void validate(const Corpus& corpus) const;
};

struct RoundRecord {
  int t = 0;
  std::vector<std::string> selected;
  int hits_this_round = 0;
  int cum_hits = 0;
  double recall = 0.0;            // cum_hits / targets in the search pool
  std::vector<double> accuracy;   // per property; empty without a holdout
  std::vector<double> pos_recall;
};

// One row of selections.csv: where each pick came from and what it was.
struct SelectionRecord {
  int t = 0;
  std::string id;
  std::string source;  // search | uncertainty | both | pool
  bool disclosed = false;
  bool was_target = false;
};

struct RunSummary {
  double hit_rate = 0.0;
  int total_hits = 0;
  std::size_t pool_targets = 0;
  double final_recall = 0.0;
  std::vector<RoundRecord> rounds;
  std::vector<SelectionRecord> selections;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

// S / (B * R).
double hit_rate(int S, int B, int R);

// Per-property (accuracy, positive recall) on a labeled holdout. Predicted
// positive means p-bar >= 0.5 (classification) or mu >= threshold
// (regression). Positive recall with no actual positives is vacuously 1.
std::vector<std::pair<double, double>> evaluate_on_holdout(
    const std::vector<BayesianNetwork>& nets, const Corpus& test,
    const EncoderSpec& encoder, const EmbeddingTable* table, int mc_samples,
    Rng rng);

class SequentialRun {
 public:
  SequentialRun(RunConfig cfg, const Corpus& corpus,
                const EmbeddingTable* table = nullptr);

  int round() const { return state_.round; }
  bool finished() const { return state_.round > cfg_.R; }
  const RunConfig& config() const { return cfg_; }
  const Corpus& pool_corpus() const { return pool_corpus_; }
  const PoolState& pool() const { return state_; }
  const Disclosure& disclosure() const { return cache_; }
  std::size_t pool_targets() const { return s_star_; }

  // Current-round predictions over the unlabeled pool, and the q/h
  // recommendation built from them. Computed lazily, once per round.
  const std::vector<PredictionRecord>& predictions();
  const RoundRecommendation& recommendation();

  // Rolls expert disclosure over the current recommendation union on this
  // round's dedicated stream. Idempotent: already-decided ids are skipped.
  void roll_disclosure();

  // The configured policy's batch for this round. Pure lookup plus this
  // round's named rng streams, so calling it twice gives the same batch.
  std::vector<std::string> policy_select();

  // Reveal the batch, record metrics, retrain, advance the round.
  RoundRecord submit(const std::vector<std::string>& ids);

  const std::vector<RoundRecord>& history() const { return history_; }
  const std::vector<SelectionRecord>& selection_log() const {
    return selections_;
  }
  RunSummary summarize() const;

 private:
  void ensure_predictions();
  bool model_needed() const;
  Eigen::MatrixXd features_for(const std::vector<std::string>& ids) const;

  RunConfig cfg_;
  Corpus pool_corpus_;
  std::optional<Corpus> holdout_;
  const EmbeddingTable* table_ = nullptr;
  Rng root_;
  std::unordered_map<std::string, FeatureVector> feats_;
  std::vector<BayesianNetwork> nets_;  // one per property
  PoolState state_;
  Disclosure cache_;
  std::size_t s_star_ = 0;
  int pred_round_ = 0;  // round predictions/recommendation are valid for
  std::vector<PredictionRecord> preds_;
  RoundRecommendation rec_;
  std::vector<RoundRecord> history_;
  std::vector<SelectionRecord> selections_;
  double wall_seconds_ = 0.0;
};

RunSummary run(const RunConfig& cfg, const Corpus& corpus,
               const EmbeddingTable* table = nullptr);

struct AggregateReport {
  std::vector<double> mean_recall, lo_band, hi_band;  // per round, +/- 2 std
  double hit_rate_mean = 0.0, hit_rate_std = 0.0;
  std::vector<RunSummary> runs;
};

// n_reps independent runs seeded base_seed .. base_seed + n_reps - 1.
AggregateReport replicate(RunConfig cfg, const Corpus& corpus, int n_reps,
                          std::uint64_t base_seed,
                          const EmbeddingTable* table = nullptr);

// Results directory: rounds.csv, summary.json, selections.csv.
void write_run_results(const std::string& dir, const RunConfig& cfg,
                       const RunSummary& summary);
void write_aggregate_csv(const std::string& path,
                         const AggregateReport& report);

}  // namespace seqdiscover
