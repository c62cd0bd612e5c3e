#pragma once
// Aggregates per-property uncertainty estimates into the two recommendation
// scores and ranks candidates deterministically.

#include <string>
#include <vector>

#include "seqdiscover/uncertainty.hpp"

namespace seqdiscover {

// Per-molecule prediction across the K properties plus both scores.
struct PredictionRecord {
  std::string id;
  std::vector<double> mu, sigma_d, sigma_m;  // K entries each
  double r_un = 0.0;                         // sum of sigma_m
  double r_se = 0.0;                         // sum of mu + sqrt(beta_t) sigma_d
};

struct BetaSchedule {
  double beta0 = 2.0;
  double kappa = 0.95;  // geometric decay factor, in (0, 1]

  void validate() const;
};

// r_un = sum_k sigma_m[k]. Entries must be non-negative.
double uncertainty_score(const std::vector<double>& sigma_m);

// beta_t = beta0 * kappa^(t-1); non-increasing in t for kappa <= 1.
double beta_at(const BetaSchedule& schedule, int t);

// r_se = sum_k (mu[k] + sqrt(beta_t) * sigma_d[k]).
double search_score(const std::vector<double>& mu,
                    const std::vector<double>& sigma_d, double beta_t);

// Record assembly from the uncertainty module's per-property estimates.
PredictionRecord make_record(std::string id,
                             const std::vector<UncertaintyEstimate>& per_prop,
                             double beta_t);

enum class ScoreKey { Uncertainty, Search };

// Ids of the k largest by the chosen score, descending; ties break by
// ascending id so rankings are reproducible.
std::vector<std::string> top_k(const std::vector<PredictionRecord>& records,
                               ScoreKey key, std::size_t k);

}  // namespace seqdiscover
