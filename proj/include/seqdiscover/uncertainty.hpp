#pragma once
// Decomposition of predictive uncertainty into a model (epistemic) part
// that extra labels can reduce and a data (aleatoric) part that they
// cannot. All entropies are in nats.

#include "seqdiscover/bnn.hpp"

namespace seqdiscover {

// Binary entropy H(p) = -p ln p - (1-p) ln(1-p), H(0) = H(1) = 0.
double entropy(double p);

struct UncertaintyEstimate {
  double mean = 0.0;     // predictive mean (probability or regression mean)
  double sigma_m = 0.0;  // model uncertainty
  double sigma_d = 0.0;  // data uncertainty
  double total = 0.0;    // H(mean) for classification, sqrt sum of squares
                         // for regression
};

// Classification: sigma_d = E_m[H(p^(m))], total = H(p-bar),
// sigma_m = total - sigma_d (the mutual information between the label and
// the weights). Needs at least 2 samples.
UncertaintyEstimate decompose_classification(const std::vector<double>& probs);

// Regression: sigma_m = population std of the M means, sigma_d = RMS of
// the M predicted stds, total^2 = sigma_m^2 + sigma_d^2.
UncertaintyEstimate decompose_regression(const std::vector<double>& means,
                                         const std::vector<double>& stds);

UncertaintyEstimate decompose(const PosteriorSampleSet& samples);

}  // namespace seqdiscover
