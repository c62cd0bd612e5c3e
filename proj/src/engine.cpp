#include "seqdiscover/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {
namespace {

using json = nlohmann::json;

std::string stream(const char* base, long a) {
  return std::string(base) + "/" + std::to_string(a);
}
std::string stream(const char* base, long a, long b) {
  return std::string(base) + "/" + std::to_string(a) + "/" +
         std::to_string(b);
}

// %.10g keeps CSV output byte-stable and round-trippable.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double population_std(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / double(v.size()));
}

}  // namespace

void RunConfig::validate(const Corpus& corpus) const {
  if (B < 1 || R < 1) throw ConfigInvalid("B and R must be at least 1");
  if (q < 0 || h < 0) throw ConfigInvalid("q and h must be non-negative");
  if (n_test >= corpus.size() && corpus.size() > 0)
    throw NTestTooLarge("n_test must leave a non-empty search pool");
  const std::size_t pool = corpus.size() - n_test;
  if (std::size_t(B) * std::size_t(R) > pool)
    throw ConfigInvalid("budget B*R exceeds the search pool");
  if (policy_needs_expert(policy.kind) && B > q + h)
    throw ConfigInvalid("expert policies need B <= q + h");
  if (mc_samples < 2)
    throw ConfigInvalid("mc_samples must be at least 2 for decomposition");
  if (!(prior_std > 0.0)) throw ConfigInvalid("prior_std must be positive");
  for (int w : hidden)
    if (w < 1) throw ConfigInvalid("hidden widths must be positive");
  encoder.validate();
  train.validate();
  beta.validate();
  expert.validate();
  if (policy.kind == PolicyKind::RandomThenUcb ||
      policy.kind == PolicyKind::AlThenUcb)
    policy.resolved_switch_round(R);  // range check
}

double hit_rate(int S, int B, int R) {
  if (B < 1 || R < 1) throw OutOfRange("B and R must be at least 1");
  if (S < 0 || S > B * R) throw OutOfRange("S must lie in [0, B*R]");
  return double(S) / (double(B) * double(R));
}

std::vector<std::pair<double, double>> evaluate_on_holdout(
    const std::vector<BayesianNetwork>& nets, const Corpus& test,
    const EncoderSpec& encoder, const EmbeddingTable* table, int mc_samples,
    Rng rng) {
  if (test.size() == 0) throw EmptyHoldout("holdout corpus is empty");
  const auto& target = test.target_spec();
  std::vector<FeatureVector> rows;
  rows.reserve(test.size());
  for (const auto& m : test.molecules())
    rows.push_back(encode(m, test.alphabet(), encoder, table));
  Eigen::MatrixXd x = to_matrix(rows);

  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < nets.size(); ++k) {
    Rng pr = rng.derive(stream("prop", long(k)));
    auto samples = sample_predict_batch(nets[k], x, mc_samples, pr);
    int correct = 0, tp = 0, pos = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto& m = test.molecules()[i];
      double est = decompose(samples[i]).mean;
      bool pred = nets[k].head == Head::Classification
                      ? est >= 0.5
                      : est >= target.thresholds[k];
      bool actual = test.true_labels(m.id)[k] >= target.thresholds[k];
      if (pred == actual) ++correct;
      if (actual) {
        ++pos;
        if (pred) ++tp;
      }
    }
    out.emplace_back(double(correct) / double(test.size()),
                     pos > 0 ? double(tp) / double(pos) : 1.0);
  }
  return out;
}

SequentialRun::SequentialRun(RunConfig cfg, const Corpus& corpus,
                             const EmbeddingTable* table)
    : cfg_(std::move(cfg)),
      pool_corpus_(corpus),
      table_(table),
      root_(cfg_.seed) {
  cfg_.validate(corpus);
  if (cfg_.encoder.kind == EncoderKind::Table) {
    if (!table_) throw ConfigInvalid("table encoder needs an embedding table");
    cfg_.encoder.dim = table_->dim();
  } else {
    cfg_.encoder.resolve_dim(corpus.alphabet());
  }

  auto parts = split_holdout(corpus, cfg_.n_test, root_.derive("split"));
  pool_corpus_ = std::move(parts.first);
  holdout_.emplace(std::move(parts.second));

  for (const auto& m : pool_corpus_.molecules())
    feats_.emplace(m.id,
                   encode(m, pool_corpus_.alphabet(), cfg_.encoder, table_));

  const auto& target = pool_corpus_.target_spec();
  std::vector<int> arch;
  arch.push_back(cfg_.encoder.dim);
  arch.insert(arch.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  arch.push_back(2);
  for (int k = 0; k < target.num_properties(); ++k) {
    Head head = target.modes[std::size_t(k)] == PropertyMode::Binary
                    ? Head::Classification
                    : Head::Regression;
    nets_.push_back(init_network(arch, head, cfg_.prior_std,
                                 root_.derive(stream("init", k)).seed()));
  }

  state_ = PoolState::fresh(pool_corpus_);
  s_star_ = pool_corpus_.count_targets();
}

bool SequentialRun::model_needed() const {
  return !(cfg_.policy.kind == PolicyKind::Random && cfg_.n_test == 0);
}

Eigen::MatrixXd SequentialRun::features_for(
    const std::vector<std::string>& ids) const {
  Eigen::MatrixXd x(Eigen::Index(ids.size()), cfg_.encoder.dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& f = feats_.at(ids[i]);
    for (int j = 0; j < cfg_.encoder.dim; ++j)
      x(Eigen::Index(i), j) = f[std::size_t(j)];
  }
  return x;
}

void SequentialRun::ensure_predictions() {
  const int t = state_.round;
  if (pred_round_ == t) return;
  std::vector<std::string> ids(state_.unlabeled.begin(),
                               state_.unlabeled.end());
  Eigen::MatrixXd x = features_for(ids);
  const std::size_t K = nets_.size();
  std::vector<std::vector<UncertaintyEstimate>> est(
      ids.size(), std::vector<UncertaintyEstimate>(K));
  for (std::size_t k = 0; k < K; ++k) {
    Rng pr = root_.derive(stream("predict", long(k), t));
    auto samples = sample_predict_batch(nets_[k], x, cfg_.mc_samples, pr);
    for (std::size_t i = 0; i < ids.size(); ++i)
      est[i][k] = decompose(samples[i]);
  }
  const double beta_t = beta_at(cfg_.beta, t);
  preds_.clear();
  preds_.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    preds_.push_back(make_record(ids[i], est[i], beta_t));

  std::unordered_map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : preds_) by_id.emplace(r.id, &r);
  const std::size_t qn = std::min<std::size_t>(std::size_t(cfg_.q), preds_.size());
  const std::size_t hn = std::min<std::size_t>(std::size_t(cfg_.h), preds_.size());
  rec_.search_batch.clear();
  rec_.uncertainty_batch.clear();
  for (const auto& id : top_k(preds_, ScoreKey::Search, hn))
    rec_.search_batch.push_back(*by_id.at(id));
  for (const auto& id : top_k(preds_, ScoreKey::Uncertainty, qn))
    rec_.uncertainty_batch.push_back(*by_id.at(id));
  pred_round_ = t;
}

const std::vector<PredictionRecord>& SequentialRun::predictions() {
  ensure_predictions();
  return preds_;
}

const RoundRecommendation& SequentialRun::recommendation() {
  ensure_predictions();
  return rec_;
}

void SequentialRun::roll_disclosure() {
  ensure_predictions();
  Rng dr = root_.derive(stream("disclose", state_.round));
  disclose(pool_corpus_, rec_.union_ids(), cfg_.expert.knowledge_p, cache_,
           dr);
}

std::vector<std::string> SequentialRun::policy_select() {
  if (finished()) throw WrongPhase("all rounds are complete");
  const auto t0 = std::chrono::steady_clock::now();
  const int t = state_.round;
  PolicyKind eff = cfg_.policy.kind;
  if (eff == PolicyKind::RandomThenUcb)
    eff = t < cfg_.policy.resolved_switch_round(cfg_.R) ? PolicyKind::Random
                                                        : PolicyKind::Ucb;
  else if (eff == PolicyKind::AlThenUcb)
    eff = t < cfg_.policy.resolved_switch_round(cfg_.R)
              ? PolicyKind::ActiveLearning
              : PolicyKind::Ucb;
  if (eff != PolicyKind::Random) ensure_predictions();

  Rng policy_rng = root_.derive(stream("policy", t));
  Rng disclose_rng = root_.derive(stream("disclose", t));
  Rng expert_rng = root_.derive(stream("expert", t));
  DelegationHooks hooks;
  const DelegationHooks* hooks_ptr = nullptr;
  if (policy_needs_expert(cfg_.policy.kind)) {
    hooks.corpus = &pool_corpus_;
    hooks.target = &pool_corpus_.target_spec();
    hooks.profile = &cfg_.expert;
    hooks.cache = &cache_;
    hooks.recommendation = &rec_;
    hooks.q = cfg_.q;
    hooks.h = cfg_.h;
    hooks.disclose_rng = &disclose_rng;
    hooks.expert_rng = &expert_rng;
    hooks_ptr = &hooks;
  }
  auto batch = select_batch(cfg_.policy, t, cfg_.R, state_, preds_, cfg_.B,
                            policy_rng, hooks_ptr);
  wall_seconds_ += std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return batch;
}

RoundRecord SequentialRun::submit(const std::vector<std::string>& ids) {
  if (finished()) throw WrongPhase("all rounds are complete");
  const auto t0 = std::chrono::steady_clock::now();
  const int t = state_.round;
  if (ids.size() != std::size_t(cfg_.B))
    throw BadSelection("selection must contain exactly B ids");
  std::set<std::string> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size())
    throw BadSelection("selection contains duplicate ids");
  if (cfg_.policy.kind == PolicyKind::HumanInLoop) {
    ensure_predictions();
    auto union_ids = rec_.union_ids();
    std::set<std::string> allowed(union_ids.begin(), union_ids.end());
    for (const auto& id : ids)
      if (!allowed.count(id))
        throw BadSelection("id outside the recommendation union: " + id);
  }

  // Source tags only exist when this round's recommendation was computed.
  std::map<std::string, std::string> source;
  if (pred_round_ == t)
    for (const auto& e : rec_.union_entries()) source[e.rec->id] = e.batch;

  auto revealed = reveal(state_, pool_corpus_, ids);

  RoundRecord record;
  record.t = t;
  record.selected = ids;
  const auto& target = pool_corpus_.target_spec();
  for (const auto& [id, labels] : revealed) {
    const bool hit = is_target(labels, target);
    if (hit) ++record.hits_this_round;
    auto sit = source.find(id);
    selections_.push_back({t, id,
                           sit == source.end() ? "pool" : sit->second,
                           cache_.is_disclosed(id), hit});
  }
  record.cum_hits =
      (history_.empty() ? 0 : history_.back().cum_hits) + record.hits_this_round;
  record.recall = s_star_ > 0 ? double(record.cum_hits) / double(s_star_) : 0.0;

  if (model_needed()) {
    std::vector<std::string> lids;
    lids.reserve(state_.labeled.size());
    for (const auto& [id, labels] : state_.labeled) lids.push_back(id);
    Eigen::MatrixXd x = features_for(lids);
    for (std::size_t k = 0; k < nets_.size(); ++k) {
      Eigen::VectorXd y(Eigen::Index(lids.size()));
      for (std::size_t i = 0; i < lids.size(); ++i)
        y(Eigen::Index(i)) = state_.labeled.at(lids[i])[k];
      TrainConfig tc = cfg_.train;
      tc.seed = root_.derive(stream("train", long(k), t)).seed();
      if (cfg_.retrain == RetrainMode::Fresh)
        nets_[k] = init_network(nets_[k].arch, nets_[k].head, cfg_.prior_std,
                                root_.derive(stream("init", long(k))).seed());
      nets_[k] = train_network(std::move(nets_[k]), x, y, tc);
    }
  }

  if (holdout_ && holdout_->size() > 0) {
    auto metrics =
        evaluate_on_holdout(nets_, *holdout_, cfg_.encoder, table_,
                            cfg_.mc_samples, root_.derive(stream("eval", t)));
    for (const auto& [acc, rec] : metrics) {
      record.accuracy.push_back(acc);
      record.pos_recall.push_back(rec);
    }
  }

  history_.push_back(record);
  wall_seconds_ += std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return record;
}

RunSummary SequentialRun::summarize() const {
  RunSummary s;
  s.total_hits = history_.empty() ? 0 : history_.back().cum_hits;
  s.hit_rate = double(s.total_hits) / (double(cfg_.B) * double(cfg_.R));
  s.pool_targets = s_star_;
  s.final_recall = history_.empty() ? 0.0 : history_.back().recall;
  s.rounds = history_;
  s.selections = selections_;
  s.wall_seconds = wall_seconds_;
  s.seed = cfg_.seed;
  return s;
}

RunSummary run(const RunConfig& cfg, const Corpus& corpus,
               const EmbeddingTable* table) {
  SequentialRun sr(cfg, corpus, table);
  while (!sr.finished()) {
    if (sr.pool().unlabeled.size() < std::size_t(cfg.B))
      throw PoolExhausted("unlabeled pool smaller than B");
    sr.submit(sr.policy_select());
  }
  return sr.summarize();
}

AggregateReport replicate(RunConfig cfg, const Corpus& corpus, int n_reps,
                          std::uint64_t base_seed,
                          const EmbeddingTable* table) {
  if (n_reps < 1) throw ConfigInvalid("n_reps must be at least 1");
  AggregateReport report;
  report.runs.reserve(std::size_t(n_reps));
  for (int i = 0; i < n_reps; ++i) {
    cfg.seed = base_seed + std::uint64_t(i);
    report.runs.push_back(run(cfg, corpus, table));
  }
  const std::size_t R = report.runs.front().rounds.size();
  for (std::size_t t = 0; t < R; ++t) {
    std::vector<double> recalls;
    recalls.reserve(report.runs.size());
    for (const auto& r : report.runs) recalls.push_back(r.rounds[t].recall);
    const double mean =
        std::accumulate(recalls.begin(), recalls.end(), 0.0) /
        double(recalls.size());
    const double sd = population_std(recalls, mean);
    report.mean_recall.push_back(mean);
    report.lo_band.push_back(mean - 2.0 * sd);
    report.hi_band.push_back(mean + 2.0 * sd);
  }
  std::vector<double> rates;
  rates.reserve(report.runs.size());
  for (const auto& r : report.runs) rates.push_back(r.hit_rate);
  report.hit_rate_mean = std::accumulate(rates.begin(), rates.end(), 0.0) /
                         double(rates.size());
  report.hit_rate_std = population_std(rates, report.hit_rate_mean);
  return report;
}

void write_run_results(const std::string& dir, const RunConfig& cfg,
                       const RunSummary& summary) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const bool has_holdout =
      !summary.rounds.empty() && !summary.rounds.front().accuracy.empty();
  const std::size_t K =
      has_holdout ? summary.rounds.front().accuracy.size() : 0;

  {
    std::ofstream out(dir + "/rounds.csv");
    out << "t,selected_count,hits,cum_hits,recall";
    for (std::size_t k = 0; k < K; ++k) out << ",acc_" << k;
    for (std::size_t k = 0; k < K; ++k) out << ",rec_" << k;
    out << "\n";
    for (const auto& r : summary.rounds) {
      out << r.t << "," << r.selected.size() << "," << r.hits_this_round
          << "," << r.cum_hits << "," << fmt(r.recall);
      for (std::size_t k = 0; k < K; ++k) out << "," << fmt(r.accuracy[k]);
      for (std::size_t k = 0; k < K; ++k) out << "," << fmt(r.pos_recall[k]);
      out << "\n";
    }
  }
  {
    std::ofstream out(dir + "/selections.csv");
    out << "t,id,source_batch,disclosed,was_target\n";
    for (const auto& s : summary.selections)
      out << s.t << "," << s.id << "," << s.source << ","
          << (s.disclosed ? 1 : 0) << "," << (s.was_target ? 1 : 0) << "\n";
  }
  {
    json j;
    j["hit_rate"] = summary.hit_rate;
    j["total_hits"] = summary.total_hits;
    j["pool_targets"] = summary.pool_targets;
    j["final_recall"] = summary.final_recall;
    j["seed"] = summary.seed;
    j["wall_seconds"] = summary.wall_seconds;
    json c;
    c["policy"] = policy_name(cfg.policy.kind);
    c["B"] = cfg.B;
    c["R"] = cfg.R;
    c["q"] = cfg.q;
    c["h"] = cfg.h;
    c["n_test"] = cfg.n_test;
    c["seed"] = cfg.seed;
    c["retrain"] = cfg.retrain == RetrainMode::Warm ? "warm" : "fresh";
    c["mc_samples"] = cfg.mc_samples;
    c["prior_std"] = cfg.prior_std;
    c["hidden"] = cfg.hidden;
    c["beta0"] = cfg.beta.beta0;
    c["kappa"] = cfg.beta.kappa;
    c["expert_p"] = cfg.expert.knowledge_p;
    c["meta_visible"] = cfg.expert.meta_visible;
    c["encoder_kind"] = cfg.encoder.kind == EncoderKind::Kmer ? "kmer"
                        : cfg.encoder.kind == EncoderKind::Onehot
                            ? "onehot"
                            : "table";
    c["encoder_k"] = cfg.encoder.k;
    c["encoder_dim"] = cfg.encoder.dim;
    c["epochs"] = cfg.train.epochs;
    c["learning_rate"] = cfg.train.learning_rate;
    c["batch_size"] = cfg.train.batch_size;
    j["config"] = std::move(c);
    std::ofstream out(dir + "/summary.json");
    out << j.dump(2) << "\n";
  }
}

void write_aggregate_csv(const std::string& path,
                         const AggregateReport& report) {
  namespace fs = std::filesystem;
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  out << "t,mean_recall,lo_band,hi_band\n";
  for (std::size_t t = 0; t < report.mean_recall.size(); ++t)
    out << (t + 1) << "," << fmt(report.mean_recall[t]) << ","
        << fmt(report.lo_band[t]) << "," << fmt(report.hi_band[t]) << "\n";
}

}  // namespace seqdiscover
