#include "seqdiscover/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {

void BetaSchedule::validate() const {
  if (!(beta0 > 0.0)) throw ConfigInvalid("beta0 must be positive");
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw ConfigInvalid("kappa must lie in (0, 1]");
}

double uncertainty_score(const std::vector<double>& sigma_m) {
  double r = 0.0;
  for (double s : sigma_m) {
    if (s < 0.0)
      throw NegativeUncertainty("model uncertainties must be non-negative");
    r += s;
  }
  return r;
}

double beta_at(const BetaSchedule& schedule, int t) {
  schedule.validate();
  if (t < 1) throw OutOfRange("rounds are numbered from 1");
  return schedule.beta0 * std::pow(schedule.kappa, double(t - 1));
}

double search_score(const std::vector<double>& mu,
                    const std::vector<double>& sigma_d, double beta_t) {
  if (mu.size() != sigma_d.size())
    throw LengthMismatch("mu and sigma_d must have one entry per property");
  if (beta_t < 0.0) throw OutOfRange("beta_t must be non-negative");
  const double root = std::sqrt(beta_t);
  double r = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) r += mu[k] + root * sigma_d[k];
  return r;
}

PredictionRecord make_record(std::string id,
                             const std::vector<UncertaintyEstimate>& per_prop,
                             double beta_t) {
  PredictionRecord rec;
  rec.id = std::move(id);
  rec.mu.reserve(per_prop.size());
  rec.sigma_d.reserve(per_prop.size());
  rec.sigma_m.reserve(per_prop.size());
  for (const auto& u : per_prop) {
    rec.mu.push_back(u.mean);
    rec.sigma_d.push_back(u.sigma_d);
    rec.sigma_m.push_back(u.sigma_m);
  }
  rec.r_un = uncertainty_score(rec.sigma_m);
  rec.r_se = search_score(rec.mu, rec.sigma_d, beta_t);
  return rec;
}

std::vector<std::string> top_k(const std::vector<PredictionRecord>& records,
                               ScoreKey key, std::size_t k) {
  if (k > records.size())
    throw KTooLarge("asked for more ids than there are records");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  auto score = [&](std::size_t i) {
    return key == ScoreKey::Uncertainty ? records[i].r_un : records[i].r_se;
  };
  std::partial_sort(order.begin(), order.begin() + std::ptrdiff_t(k),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (score(a) != score(b)) return score(a) > score(b);
                      return records[a].id < records[b].id;
                    });
  std::vector<std::string> ids;
  ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(records[order[i]].id);
  return ids;
}

}  // namespace seqdiscover
