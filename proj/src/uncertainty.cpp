#include "seqdiscover/uncertainty.hpp"

#include <cmath>
#include <numeric>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {
namespace {

// Jensen guarantees H(p-bar) >= E[H(p)]; anything below this is a float
// artifact, anything further negative is a bug upstream.
constexpr double kNegativeTolerance = 1e-9;

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

}  // namespace

double entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw OutOfRange("entropy needs a probability in [0, 1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

UncertaintyEstimate decompose_classification(const std::vector<double>& probs) {
  if (probs.size() < 2)
    throw TooFewSamples("decomposition needs at least 2 posterior samples");
  UncertaintyEstimate u;
  double h_sum = 0.0;
  for (double p : probs) h_sum += entropy(p);
  u.mean = mean_of(probs);
  u.sigma_d = h_sum / double(probs.size());
  u.total = entropy(u.mean);
  u.sigma_m = u.total - u.sigma_d;
  if (u.sigma_m < 0.0) {
    if (u.sigma_m < -kNegativeTolerance)
      throw NegativeUncertainty("mutual information came out negative");
    u.sigma_m = 0.0;
  }
  return u;
}

UncertaintyEstimate decompose_regression(const std::vector<double>& means,
                                         const std::vector<double>& stds) {
  if (means.size() < 2)
    throw TooFewSamples("decomposition needs at least 2 posterior samples");
  if (stds.size() != means.size())
    throw LengthMismatch("means and stds must pair up");
  UncertaintyEstimate u;
  u.mean = mean_of(means);
  double var = 0.0, ms = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    var += (means[i] - u.mean) * (means[i] - u.mean);
    ms += stds[i] * stds[i];
  }
  u.sigma_m = std::sqrt(var / double(means.size()));  // population std
  u.sigma_d = std::sqrt(ms / double(means.size()));   // RMS
  u.total = std::sqrt(u.sigma_m * u.sigma_m + u.sigma_d * u.sigma_d);
  return u;
}

UncertaintyEstimate decompose(const PosteriorSampleSet& samples) {
  return samples.head == Head::Classification
             ? decompose_classification(samples.probs)
             : decompose_regression(samples.means, samples.stds);
}

}  // namespace seqdiscover
