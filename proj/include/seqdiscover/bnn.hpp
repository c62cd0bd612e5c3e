#pragma once
// Mean-field Gaussian Bayesian feed-forward networks trained by
// reparameterized variational inference (Bayes by backprop). Every weight
// and bias carries a (mu, rho) pair with sigma_q = softplus(rho), a
// closed-form KL to the isotropic Gaussian prior, and Monte Carlo
// predictive sampling for a classification (2-logit softmax) or regression
// (mean + log-variance) head.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqdiscover/encoder.hpp"
#include "seqdiscover/rng.hpp"

namespace seqdiscover {

enum class Head { Classification, Regression };

inline double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double softplus_inverse(double y) { return std::log(std::expm1(y)); }

// One affine layer of variational parameters. sigma_q = softplus(rho) keeps
// the posterior std strictly positive.
struct VariationalLayer {
  Eigen::MatrixXd w_mu, w_rho;  // in x out
  Eigen::VectorXd b_mu, b_rho;  // out

  Eigen::MatrixXd w_sigma() const {
    return w_rho.unaryExpr([](double r) { return softplus(r); });
  }
  Eigen::VectorXd b_sigma() const {
    return b_rho.unaryExpr([](double r) { return softplus(r); });
  }
};

struct BayesianNetwork {
  std::vector<int> arch;  // layer widths, input first; final width is 2
  Head head = Head::Classification;
  double prior_std = 0.01;
  std::vector<VariationalLayer> layers;

  int input_dim() const { return arch.front(); }
  std::size_t num_variational_params() const;
};

// mu ~ N(0, prior_std), rho set so the initial sigma_q equals prior_std.
BayesianNetwork init_network(const std::vector<int>& arch, Head head,
                             double prior_std, std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 5e-4;
  int epochs = 200;
  int batch_size = 50;
  int mc_train_samples = 1;
  double kl_scale = 0.0;  // <= 0 selects 1/n, the full-ELBO share for a
                          // per-example mean NLL
  std::uint64_t seed = 1;

  void validate() const;
};

// One reparameterization draw: epsilon for every weight and bias.
struct NoiseDraw {
  std::vector<Eigen::MatrixXd> w_eps;
  std::vector<Eigen::VectorXd> b_eps;
};

std::vector<NoiseDraw> sample_noise(const BayesianNetwork& net, int draws,
                                    Rng& rng);

// Same shape as the layer parameters; holds d(loss)/d(mu) and d(loss)/d(rho).
struct NetGradients {
  std::vector<VariationalLayer> layers;
};

// Closed-form KL(q || prior) summed over all weights and biases:
// ln(sigma_p / sigma_q) + (sigma_q^2 + mu^2) / (2 sigma_p^2) - 1/2 each.
double kl_to_prior(const BayesianNetwork& net);

// Negative-ELBO estimate: batch-average NLL (mean over the given noise
// draws) + kl_scale * kl_to_prior. Classification NLL is softmax
// cross-entropy; regression NLL is the full Gaussian form including the
// (1/2) ln(2 pi) constant.
double elbo_loss(const BayesianNetwork& net, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& y, double kl_scale,
                 const std::vector<NoiseDraw>& noise);

// Analytic gradient of elbo_loss for the same frozen noise.
NetGradients elbo_grad(const BayesianNetwork& net, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, double kl_scale,
                       const std::vector<NoiseDraw>& noise);

// Convenience overload over (feature, label) pairs with fresh noise.
double elbo_loss(const BayesianNetwork& net,
                 const std::vector<std::pair<FeatureVector, double>>& batch,
                 const TrainConfig& cfg, Rng& rng);

// Minibatch Adam on the variational parameters. An empty dataset returns
// the network unchanged (cold start: predictions stay prior draws).
// Optionally records the per-epoch mean minibatch loss.
BayesianNetwork train_network(BayesianNetwork net, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y, const TrainConfig& cfg,
                              std::vector<double>* loss_trajectory = nullptr);
BayesianNetwork train_network(
    BayesianNetwork net,
    const std::vector<std::pair<FeatureVector, double>>& labeled,
    const TrainConfig& cfg, std::vector<double>* loss_trajectory = nullptr);

// M posterior draws for one input (classification: positive-class
// probabilities; regression: (mean, std) pairs with std = exp(logvar / 2)).
struct PosteriorSampleSet {
  Head head = Head::Classification;
  std::vector<double> probs;  // classification p^(m), in (0,1)
  std::vector<double> means;  // regression y^(m)
  std::vector<double> stds;   // regression sigma_theta^(m)

  int size() const {
    return static_cast<int>(head == Head::Classification ? probs.size()
                                                         : means.size());
  }
};

PosteriorSampleSet sample_predict(const BayesianNetwork& net,
                                  const FeatureVector& x, int draws, Rng& rng);

// Pool-wide prediction: the same M weight draws are shared across all rows,
// i.e. M full-network samples theta^(m) each evaluated on every input.
std::vector<PosteriorSampleSet> sample_predict_batch(const BayesianNetwork& net,
                                                     const Eigen::MatrixXd& x,
                                                     int draws, Rng& rng);

// Checkpointing: versioned JSON blob of arch + all (mu, rho) pairs.
void save_network(const BayesianNetwork& net, const std::string& path);
BayesianNetwork load_network(const std::string& path);

Eigen::MatrixXd to_matrix(const std::vector<FeatureVector>& rows);

}  // namespace seqdiscover
