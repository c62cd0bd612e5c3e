#include "seqdiscover/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {
namespace {

using json = nlohmann::json;

constexpr double kLogitClamp = 40.0;
constexpr double kLogVarClamp = 40.0;
const double kHalfLog2Pi = 0.5 * std::log(2.0 * M_PI);

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

// Row-major fill so the draw order is independent of Eigen's storage layout.
void fill_normal(Eigen::MatrixXd& m, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
}

void fill_normal(Eigen::VectorXd& v, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
}

void check_arch(const std::vector<int>& arch, double prior_std) {
  if (arch.size() < 2)
    throw BadArch("architecture needs an input and an output layer");
  for (int w : arch)
    if (w < 1) throw BadArch("layer widths must be positive");
  if (arch.back() != 2) throw BadArch("output layer width must be 2");
  if (!(prior_std > 0.0)) throw BadArch("prior_std must be positive");
}

// Realized weights for one noise draw: W = mu + softplus(rho) * eps.
struct Realized {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

Realized realize(const BayesianNetwork& net, const NoiseDraw& eps) {
  Realized r;
  r.w.reserve(net.layers.size());
  r.b.reserve(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& vl = net.layers[l];
    r.w.push_back(vl.w_mu + vl.w_sigma().cwiseProduct(eps.w_eps[l]));
    r.b.push_back(vl.b_mu + vl.b_sigma().cwiseProduct(eps.b_eps[l]));
  }
  return r;
}

// Forward pass retaining pre-activations for backprop. Hidden layers are
// ReLU; the final layer is linear (the head interprets the 2 outputs).
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> acts;  // acts[l] is the input to layer l
  Eigen::MatrixXd out;                // N x 2
};

ForwardTrace forward(const Realized& r, const Eigen::MatrixXd& x) {
  ForwardTrace t;
  t.acts.reserve(r.w.size());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < r.w.size(); ++l) {
    t.acts.push_back(a);
    Eigen::MatrixXd z = (a * r.w[l]).rowwise() + r.b[l].transpose();
    if (l + 1 < r.w.size()) a = z.cwiseMax(0.0);
    else t.out = std::move(z);
  }
  return t;
}

// Per-row NLL and d(NLL)/d(logits) for the batch mean loss.
double head_loss_grad(Head head, const Eigen::MatrixXd& out,
                      const Eigen::VectorXd& y, Eigen::MatrixXd* dout) {
  const Eigen::Index n = out.rows();
  double total = 0.0;
  if (dout) dout->setZero(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (head == Head::Classification) {
      // Logit 0 scores the positive class. Stable log-softmax.
      double m = std::max(out(i, 0), out(i, 1));
      double e0 = std::exp(out(i, 0) - m), e1 = std::exp(out(i, 1) - m);
      double lse = m + std::log(e0 + e1);
      bool pos = y(i) > 0.5;
      total += lse - (pos ? out(i, 0) : out(i, 1));
      if (dout) {
        double p0 = e0 / (e0 + e1);
        (*dout)(i, 0) = (p0 - (pos ? 1.0 : 0.0)) / double(n);
        (*dout)(i, 1) = ((1.0 - p0) - (pos ? 0.0 : 1.0)) / double(n);
      }
    } else {
      double mean = out(i, 0);
      double lv = std::clamp(out(i, 1), -kLogVarClamp, kLogVarClamp);
      double var = std::exp(lv);
      double d = y(i) - mean;
      total += kHalfLog2Pi + 0.5 * lv + d * d / (2.0 * var);
      if (dout) {
        (*dout)(i, 0) = (mean - y(i)) / var / double(n);
        bool inside = out(i, 1) > -kLogVarClamp && out(i, 1) < kLogVarClamp;
        (*dout)(i, 1) = inside ? 0.5 * (1.0 - d * d / var) / double(n) : 0.0;
      }
    }
  }
  return total / double(n);
}

void check_batch(const BayesianNetwork& net, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& y, const std::vector<NoiseDraw>& noise) {
  if (x.rows() == 0) throw EmptyBatch("loss needs at least one example");
  if (x.cols() != net.input_dim())
    throw DimMismatch("feature width does not match the network input");
  if (y.size() != x.rows())
    throw LengthMismatch("labels and features disagree on batch size");
  if (noise.empty()) throw EmptyBatch("need at least one noise draw");
}

NetGradients zero_grads(const BayesianNetwork& net) {
  NetGradients g;
  g.layers.reserve(net.layers.size());
  for (const auto& vl : net.layers) {
    VariationalLayer z;
    z.w_mu = Eigen::MatrixXd::Zero(vl.w_mu.rows(), vl.w_mu.cols());
    z.w_rho = z.w_mu;
    z.b_mu = Eigen::VectorXd::Zero(vl.b_mu.size());
    z.b_rho = z.b_mu;
    g.layers.push_back(std::move(z));
  }
  return g;
}

// Shared loss + gradient core so training never runs the forward pass twice.
double loss_and_grad(const BayesianNetwork& net, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y, double kl_scale,
                     const std::vector<NoiseDraw>& noise, NetGradients* grads) {
  check_batch(net, x, y, noise);
  const std::size_t nlayers = net.layers.size();
  double nll_sum = 0.0;
  for (const auto& eps : noise) {
    Realized r = realize(net, eps);
    ForwardTrace t = forward(r, x);
    Eigen::MatrixXd dout;
    nll_sum += head_loss_grad(net.head, t.out, y, grads ? &dout : nullptr);
    if (!grads) continue;
    Eigen::MatrixXd dz = std::move(dout);
    for (std::size_t li = nlayers; li-- > 0;) {
      const auto& vl = net.layers[li];
      Eigen::MatrixXd dw = t.acts[li].transpose() * dz;
      Eigen::VectorXd db = dz.colwise().sum();
      if (li > 0) {
        Eigen::MatrixXd da = dz * r.w[li].transpose();
        // ReLU mask from the realized pre-activations of the layer below.
        Eigen::MatrixXd zprev =
            (t.acts[li - 1] * r.w[li - 1]).rowwise() + r.b[li - 1].transpose();
        dz = da.cwiseProduct(
            (zprev.array() > 0.0).cast<double>().matrix());
      }
      // d(sigma_q)/d(rho) = sigmoid(rho); eps routes dW into rho.
      auto& gl = grads->layers[li];
      gl.w_mu += dw;
      gl.w_rho += dw.cwiseProduct(eps.w_eps[li])
                      .cwiseProduct(vl.w_rho.unaryExpr(
                          [](double r_) { return sigmoid(r_); }));
      gl.b_mu += db;
      gl.b_rho += db.cwiseProduct(eps.b_eps[li])
                      .cwiseProduct(vl.b_rho.unaryExpr(
                          [](double r_) { return sigmoid(r_); }));
    }
  }
  const double inv_m = 1.0 / double(noise.size());
  if (grads) {
    const double sp2 = net.prior_std * net.prior_std;
    for (std::size_t li = 0; li < nlayers; ++li) {
      auto& gl = grads->layers[li];
      const auto& vl = net.layers[li];
      gl.w_mu = gl.w_mu * inv_m + kl_scale * vl.w_mu / sp2;
      gl.b_mu = gl.b_mu * inv_m + kl_scale * vl.b_mu / sp2;
      auto rho_kl = [&](double rho) {
        double sq = softplus(rho);
        return (sq / sp2 - 1.0 / sq) * sigmoid(rho);
      };
      gl.w_rho = gl.w_rho * inv_m + kl_scale * vl.w_rho.unaryExpr(rho_kl);
      gl.b_rho = gl.b_rho * inv_m + kl_scale * vl.b_rho.unaryExpr(rho_kl);
    }
  }
  return nll_sum * inv_m + kl_scale * kl_to_prior(net);
}

// Adam moments, one pair of tensors per parameter tensor.
struct AdamState {
  std::vector<VariationalLayer> m, v;
  long t = 0;

  explicit AdamState(const BayesianNetwork& net) {
    NetGradients z = zero_grads(net);
    m = z.layers;
    v = z.layers;
  }
};

void adam_step(BayesianNetwork& net, const NetGradients& g, AdamState& st,
               double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++st.t;
  const double c1 = 1.0 - std::pow(b1, double(st.t));
  const double c2 = 1.0 - std::pow(b2, double(st.t));
  auto upd = [&](auto& param, const auto& grad, auto& mm, auto& vv) {
    mm = b1 * mm + (1.0 - b1) * grad;
    vv = b2 * vv.array() + (1.0 - b2) * grad.array().square();
    param.array() -=
        lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    upd(net.layers[l].w_mu, g.layers[l].w_mu, st.m[l].w_mu, st.v[l].w_mu);
    upd(net.layers[l].w_rho, g.layers[l].w_rho, st.m[l].w_rho, st.v[l].w_rho);
    upd(net.layers[l].b_mu, g.layers[l].b_mu, st.m[l].b_mu, st.v[l].b_mu);
    upd(net.layers[l].b_rho, g.layers[l].b_rho, st.m[l].b_rho, st.v[l].b_rho);
  }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows,
                                 Eigen::Index cols) {
  if (!j.is_array() || Eigen::Index(j.size()) != rows)
    throw ParseError("checkpoint matrix has wrong row count");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || Eigen::Index(row.size()) != cols)
      throw ParseError("checkpoint matrix has wrong column count");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[c].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index n) {
  if (!j.is_array() || Eigen::Index(j.size()) != n)
    throw ParseError("checkpoint vector has wrong length");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

std::size_t BayesianNetwork::num_variational_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < arch.size(); ++l)
    n += std::size_t(arch[l]) * std::size_t(arch[l + 1]) +
         std::size_t(arch[l + 1]);
  return n;
}

BayesianNetwork init_network(const std::vector<int>& arch, Head head,
                             double prior_std, std::uint64_t seed) {
  check_arch(arch, prior_std);
  BayesianNetwork net;
  net.arch = arch;
  net.head = head;
  net.prior_std = prior_std;
  const double rho0 = softplus_inverse(prior_std);
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
    VariationalLayer vl;
    vl.w_mu.resize(arch[l], arch[l + 1]);
    fill_normal(vl.w_mu, rng);
    vl.w_mu *= prior_std;
    vl.b_mu.resize(arch[l + 1]);
    fill_normal(vl.b_mu, rng);
    vl.b_mu *= prior_std;
    vl.w_rho = Eigen::MatrixXd::Constant(arch[l], arch[l + 1], rho0);
    vl.b_rho = Eigen::VectorXd::Constant(arch[l + 1], rho0);
    net.layers.push_back(std::move(vl));
  }
  return net;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw ConfigInvalid("learning_rate must be positive");
  if (epochs < 1) throw ConfigInvalid("epochs must be at least 1");
  if (batch_size < 1) throw ConfigInvalid("batch_size must be at least 1");
  if (mc_train_samples < 1)
    throw ConfigInvalid("mc_train_samples must be at least 1");
}

std::vector<NoiseDraw> sample_noise(const BayesianNetwork& net, int draws,
                                    Rng& rng) {
  if (draws < 1) throw OutOfRange("need at least one noise draw");
  std::vector<NoiseDraw> out;
  out.reserve(draws);
  for (int m = 0; m < draws; ++m) {
    NoiseDraw d;
    for (const auto& vl : net.layers) {
      Eigen::MatrixXd we(vl.w_mu.rows(), vl.w_mu.cols());
      fill_normal(we, rng);
      d.w_eps.push_back(std::move(we));
      Eigen::VectorXd be(vl.b_mu.size());
      fill_normal(be, rng);
      d.b_eps.push_back(std::move(be));
    }
    out.push_back(std::move(d));
  }
  return out;
}

double kl_to_prior(const BayesianNetwork& net) {
  const double sp = net.prior_std;
  const double sp2 = sp * sp;
  auto term = [&](double mu, double rho) {
    double sq = softplus(rho);
    return std::log(sp / sq) + (sq * sq + mu * mu) / (2.0 * sp2) - 0.5;
  };
  double kl = 0.0;
  for (const auto& vl : net.layers) {
    for (Eigen::Index i = 0; i < vl.w_mu.rows(); ++i)
      for (Eigen::Index j = 0; j < vl.w_mu.cols(); ++j)
        kl += term(vl.w_mu(i, j), vl.w_rho(i, j));
    for (Eigen::Index i = 0; i < vl.b_mu.size(); ++i)
      kl += term(vl.b_mu(i), vl.b_rho(i));
  }
  return kl;
}

double elbo_loss(const BayesianNetwork& net, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& y, double kl_scale,
                 const std::vector<NoiseDraw>& noise) {
  return loss_and_grad(net, x, y, kl_scale, noise, nullptr);
}

NetGradients elbo_grad(const BayesianNetwork& net, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, double kl_scale,
                       const std::vector<NoiseDraw>& noise) {
  NetGradients g = zero_grads(net);
  loss_and_grad(net, x, y, kl_scale, noise, &g);
  return g;
}

double elbo_loss(const BayesianNetwork& net,
                 const std::vector<std::pair<FeatureVector, double>>& batch,
                 const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (batch.empty()) throw EmptyBatch("loss needs at least one example");
  std::vector<FeatureVector> feats;
  Eigen::VectorXd y(batch.size());
  feats.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    feats.push_back(batch[i].first);
    y(Eigen::Index(i)) = batch[i].second;
  }
  auto noise = sample_noise(net, cfg.mc_train_samples, rng);
  double kl = cfg.kl_scale > 0.0 ? cfg.kl_scale : 1.0;
  return elbo_loss(net, to_matrix(feats), y, kl, noise);
}

BayesianNetwork train_network(BayesianNetwork net, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y, const TrainConfig& cfg,
                              std::vector<double>* loss_trajectory) {
  cfg.validate();
  const Eigen::Index n = x.rows();
  if (n == 0) return net;  // nothing to fit; posterior stays as handed in
  if (x.cols() != net.input_dim())
    throw DimMismatch("feature width does not match the network input");
  if (y.size() != n)
    throw LengthMismatch("labels and features disagree on batch size");

  const long n_mb = (long(n) + cfg.batch_size - 1) / cfg.batch_size;
  // Auto weighting: the loss averages NLL per example, so the full-dataset
  // ELBO assigns the KL a 1/n share, not 1/n_minibatches (that would
  // overweight the prior by the batch size).
  const double kl_scale = cfg.kl_scale > 0.0 ? cfg.kl_scale : 1.0 / double(n);

  Rng root(cfg.seed);
  Rng shuffle_rng = root.derive("shuffle");
  Rng noise_rng = root.derive("noise");

  AdamState adam(net);
  std::vector<std::size_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(perm);
    double epoch_loss = 0.0;
    for (long mb = 0; mb < n_mb; ++mb) {
      const long lo = mb * cfg.batch_size;
      const long hi = std::min(lo + cfg.batch_size, long(n));
      Eigen::MatrixXd xb(hi - lo, x.cols());
      Eigen::VectorXd yb(hi - lo);
      for (long i = lo; i < hi; ++i) {
        xb.row(i - lo) = x.row(Eigen::Index(perm[std::size_t(i)]));
        yb(i - lo) = y(Eigen::Index(perm[std::size_t(i)]));
      }
      auto noise = sample_noise(net, cfg.mc_train_samples, noise_rng);
      NetGradients g = zero_grads(net);
      epoch_loss += loss_and_grad(net, xb, yb, kl_scale, noise, &g);
      adam_step(net, g, adam, cfg.learning_rate);
    }
    if (loss_trajectory) loss_trajectory->push_back(epoch_loss / double(n_mb));
  }
  return net;
}

BayesianNetwork train_network(
    BayesianNetwork net,
    const std::vector<std::pair<FeatureVector, double>>& labeled,
    const TrainConfig& cfg, std::vector<double>* loss_trajectory) {
  if (labeled.empty()) {
    cfg.validate();
    return net;
  }
  std::vector<FeatureVector> feats;
  Eigen::VectorXd y(labeled.size());
  feats.reserve(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    feats.push_back(labeled[i].first);
    y(Eigen::Index(i)) = labeled[i].second;
  }
  return train_network(std::move(net), to_matrix(feats), y, cfg,
                       loss_trajectory);
}

std::vector<PosteriorSampleSet> sample_predict_batch(const BayesianNetwork& net,
                                                     const Eigen::MatrixXd& x,
                                                     int draws, Rng& rng) {
  if (draws < 1) throw OutOfRange("need at least one posterior draw");
  if (x.cols() != net.input_dim())
    throw DimMismatch("feature width does not match the network input");
  const Eigen::Index n = x.rows();
  std::vector<PosteriorSampleSet> out(static_cast<std::size_t>(n));
  for (auto& s : out) {
    s.head = net.head;
    if (net.head == Head::Classification) s.probs.reserve(draws);
    else {
      s.means.reserve(draws);
      s.stds.reserve(draws);
    }
  }
  auto noise = sample_noise(net, draws, rng);
  for (int m = 0; m < draws; ++m) {
    Realized r = realize(net, noise[std::size_t(m)]);
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < r.w.size(); ++l) {
      Eigen::MatrixXd z = (a * r.w[l]).rowwise() + r.b[l].transpose();
      a = (l + 1 < r.w.size()) ? z.cwiseMax(0.0).eval() : std::move(z);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& s = out[std::size_t(i)];
      if (net.head == Head::Classification) {
        double d = std::clamp(a(i, 0) - a(i, 1), -kLogitClamp, kLogitClamp);
        s.probs.push_back(sigmoid(d));
      } else {
        s.means.push_back(a(i, 0));
        double lv = std::clamp(a(i, 1), -kLogVarClamp, kLogVarClamp);
        s.stds.push_back(std::exp(0.5 * lv));
      }
    }
  }
  return out;
}

PosteriorSampleSet sample_predict(const BayesianNetwork& net,
                                  const FeatureVector& x, int draws, Rng& rng) {
  Eigen::MatrixXd row(1, Eigen::Index(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) row(0, Eigen::Index(j)) = x[j];
  return sample_predict_batch(net, row, draws, rng).front();
}

void save_network(const BayesianNetwork& net, const std::string& path) {
  json j;
  j["format"] = "seqdiscover-bnn";
  j["version"] = 1;
  j["arch"] = net.arch;
  j["head"] =
      net.head == Head::Classification ? "classification" : "regression";
  j["prior_std"] = net.prior_std;
  json layers = json::array();
  for (const auto& vl : net.layers) {
    json lj;
    lj["w_mu"] = matrix_to_json(vl.w_mu);
    lj["w_rho"] = matrix_to_json(vl.w_rho);
    lj["b_mu"] = std::vector<double>(vl.b_mu.data(),
                                     vl.b_mu.data() + vl.b_mu.size());
    lj["b_rho"] = std::vector<double>(vl.b_rho.data(),
                                      vl.b_rho.data() + vl.b_rho.size());
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open checkpoint for writing: " + path);
  out << j.dump(2) << "\n";
}

BayesianNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad checkpoint json: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "seqdiscover-bnn" ||
        j.at("version").get<int>() != 1)
      throw ParseError("unrecognized checkpoint format");
    std::vector<int> arch = j.at("arch").get<std::vector<int>>();
    std::string head_s = j.at("head").get<std::string>();
    double prior_std = j.at("prior_std").get<double>();
    check_arch(arch, prior_std);
    Head head;
    if (head_s == "classification") head = Head::Classification;
    else if (head_s == "regression") head = Head::Regression;
    else throw ParseError("unknown head: " + head_s);
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() + 1 != arch.size())
      throw ParseError("checkpoint layer count does not match arch");
    BayesianNetwork net;
    net.arch = arch;
    net.head = head;
    net.prior_std = prior_std;
    for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
      VariationalLayer vl;
      vl.w_mu = matrix_from_json(layers[l].at("w_mu"), arch[l], arch[l + 1]);
      vl.w_rho = matrix_from_json(layers[l].at("w_rho"), arch[l], arch[l + 1]);
      vl.b_mu = vector_from_json(layers[l].at("b_mu"), arch[l + 1]);
      vl.b_rho = vector_from_json(layers[l].at("b_rho"), arch[l + 1]);
      net.layers.push_back(std::move(vl));
    }
    return net;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad checkpoint json: ") + e.what());
  }
}

Eigen::MatrixXd to_matrix(const std::vector<FeatureVector>& rows) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t d = rows.front().size();
  Eigen::MatrixXd m(Eigen::Index(rows.size()), Eigen::Index(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d)
      throw DimMismatch("feature rows have inconsistent widths");
    for (std::size_t j = 0; j < d; ++j)
      m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  }
  return m;
}

}  // namespace seqdiscover
