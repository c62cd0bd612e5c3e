// Learning gate: the variational net fits cleanly separable data and its
// model uncertainty inflates away from that data.
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acceptance.hpp"
#include "seqdiscover/bnn.hpp"
#include "seqdiscover/rng.hpp"
#include "seqdiscover/uncertainty.hpp"

namespace sd = seqdiscover;
using acceptance::fmt;
using acceptance::Suite;

namespace {

struct Blobs {
  Eigen::MatrixXd x_train, x_test;
  Eigen::VectorXd y_train, y_test;
};

// Two well-separated Gaussian blobs; 500 train / 200 holdout.
Blobs make_blobs() {
  sd::Rng rng(20240817);
  auto fill = [&](Eigen::MatrixXd& x, Eigen::VectorXd& y, int n,
                  const char* stream) {
    sd::Rng draw = rng.derive(stream);
    x.resize(n, 2);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
      const int label = i % 2;
      const double cx = label == 0 ? -2.0 : 2.0;
      const double cy = label == 0 ? -1.0 : 1.0;
      x(i, 0) = cx + 0.8 * draw.normal();
      x(i, 1) = cy + 0.8 * draw.normal();
      y(i) = label;
    }
  };
  Blobs b;
  fill(b.x_train, b.y_train, 500, "train");
  fill(b.x_test, b.y_test, 200, "test");
  return b;
}

// Plain logistic regression fitted by full-batch gradient descent.
Eigen::Vector3d logistic_fit(const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& y) {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();  // (w0, w1, bias)
  const double lr = 0.3;
  const int n = int(x.rows());
  for (int iter = 0; iter < 3000; ++iter) {
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
      const double z = w(0) * x(i, 0) + w(1) * x(i, 1) + w(2);
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double err = p - y(i);
      grad(0) += err * x(i, 0);
      grad(1) += err * x(i, 1);
      grad(2) += err;
    }
    w -= lr * grad / double(n);
  }
  return w;
}

double logistic_accuracy(const Eigen::Vector3d& w, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y) {
  int correct = 0;
  for (int i = 0; i < x.rows(); ++i) {
    const double z = w(0) * x(i, 0) + w(1) * x(i, 1) + w(2);
    if ((z >= 0.0) == (y(i) >= 0.5)) ++correct;
  }
  return double(correct) / double(x.rows());
}

struct Fit {
  sd::BayesianNetwork net;
  Blobs data;
  double train_acc = 0.0, test_acc = 0.0;
  double lr_train_acc = 0.0, lr_test_acc = 0.0;
};

// One shared fit: both criteria interrogate the same trained network.
const Fit& fitted() {
  static const Fit fit = [] {
    Fit f;
    f.data = make_blobs();
    sd::TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 150;
    cfg.batch_size = 50;
    cfg.mc_train_samples = 1;
    cfg.seed = 5;
    auto net = sd::init_network({2, 16, 2}, sd::Head::Classification, 0.5, 11);
    f.net = sd::train_network(std::move(net), f.data.x_train, f.data.y_train,
                              cfg);

    auto accuracy = [&](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const char* stream) {
      sd::Rng rng(77);
      sd::Rng draw = rng.derive(stream);
      const auto sets = sd::sample_predict_batch(f.net, x, 30, draw);
      int correct = 0;
      for (std::size_t i = 0; i < sets.size(); ++i) {
        const double p = sd::decompose(sets[i]).mean;
        if ((p >= 0.5) == (y(int(i)) >= 0.5)) ++correct;
      }
      return double(correct) / double(sets.size());
    };
    f.train_acc = accuracy(f.data.x_train, f.data.y_train, "acc/train");
    f.test_acc = accuracy(f.data.x_test, f.data.y_test, "acc/test");

    const auto w = logistic_fit(f.data.x_train, f.data.y_train);
    f.lr_train_acc = logistic_accuracy(w, f.data.x_train, f.data.y_train);
    f.lr_test_acc = logistic_accuracy(w, f.data.x_test, f.data.y_test);
    return f;
  }();
  return fit;
}

bool blob_accuracy(std::string& detail) {
  const Fit& f = fitted();
  const double gap = std::abs(f.test_acc - f.lr_test_acc);
  detail = fmt("train %.3f (need >= 0.95), holdout %.3f (need >= 0.90), "
               "logistic oracle train %.3f holdout %.3f, |gap| %.3f "
               "(need <= 0.05)",
               f.train_acc, f.test_acc, f.lr_train_acc, f.lr_test_acc, gap);
  return f.train_acc >= 0.95 && f.test_acc >= 0.90 && gap <= 0.05;
}

bool epistemic_separation(std::string& detail) {
  const Fit& f = fitted();
  sd::Rng rng(909);

  auto mean_sigma_m = [&](const Eigen::MatrixXd& x, const char* stream) {
    sd::Rng draw = rng.derive(stream);
    const auto sets = sd::sample_predict_batch(f.net, x, 50, draw);
    double acc = 0.0;
    for (const auto& s : sets) acc += sd::decompose(s).sigma_m;
    return acc / double(sets.size());
  };

  // Probes on a wide ring far outside both blobs.
  const int n_probes = 64;
  Eigen::MatrixXd probes(n_probes, 2);
  for (int i = 0; i < n_probes; ++i) {
    const double a = 2.0 * 3.14159265358979323846 * i / n_probes;
    probes(i, 0) = 9.0 * std::cos(a);
    probes(i, 1) = 9.0 * std::sin(a);
  }

  const double id_sigma = mean_sigma_m(f.data.x_test, "id");
  const double ood_sigma = mean_sigma_m(probes, "ood");
  detail = fmt("mean sigma_m: in-distribution %.5f, out-of-distribution %.5f, "
               "ratio %.2f (need >= 2)",
               id_sigma, ood_sigma, ood_sigma / id_sigma);
  return ood_sigma >= 2.0 * id_sigma;
}

}  // namespace

Suite acceptance::build_learning_suite() {
  return {"learning",
          {
              {"BNN fits separable blobs and tracks the logistic oracle",
               blob_accuracy},
              {"model uncertainty at least doubles off-distribution",
               epistemic_separation},
          }};
}
