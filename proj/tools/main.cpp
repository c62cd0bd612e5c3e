// seqdiscover: batch entry point. Subcommands: synth (emit a synthetic
// corpus CSV), run (one experiment), replicate (n runs + aggregate bands),
// serve (interactive HTTP sessions), report (compare results directories).
// Config file keys (TOML sections [corpus] [encoder] [bnn] [train]
// [schedule] [policy] [expert] [run]) map one-for-one onto flags; flags win.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqdiscover/engine.hpp"
#include "seqdiscover/errors.hpp"
#include "seqdiscover/service.hpp"
#include "seqdiscover/synth.hpp"

namespace sd = seqdiscover;
using nlohmann::json;

namespace {

struct Options {
  // corpus
  std::string data;
  std::vector<std::string> properties = {"p0", "p1", "p2"};
  std::vector<double> thresholds;  // non-empty switches to continuous mode
  std::size_t n = 2000;
  double target_rate = 0.015, decoy_rate = 0.03, label_noise = 0.02;
  std::size_t min_len = 10, max_len = 14;
  std::uint64_t corpus_seed = 1;
  // encoder
  std::string encoder_kind = "kmer";
  int kmer_k = 1;
  bool normalize = true;
  std::string table_path;
  // bnn
  std::vector<int> hidden = {24, 12};
  double prior_std = 0.1;
  int mc_samples = 30;
  // train
  double learning_rate = 5e-4;
  int epochs = 200;
  int batch_size = 50;
  int mc_train = 1;
  double kl_scale = 0.0;
  // schedule
  double beta0 = 2.0, kappa = 0.95;
  // policy
  std::string policy = "ucb";
  int switch_round = 0;
  // expert
  double expert_p = 0.0;
  bool meta_visible = true;
  bool no_meta = false;
  std::string split = "ramp(0.3,1.0)";
  // run
  int B = 20, R = 20, q = 20, h = 20;
  std::size_t n_test = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::string retrain = "warm";
  int reps = 10;
};

void add_corpus_options(CLI::App* sub, Options& o) {
  // --h is taken by the search batch size, so help drops its short form.
  sub->set_help_flag("--help", "print help and exit");
  sub->add_option("--data,--corpus.data", o.data,
                  "dataset CSV; omit to generate a synthetic corpus");
  sub->add_option("--properties,--corpus.properties", o.properties,
                  "target property column names");
  sub->add_option("--thresholds,--corpus.thresholds", o.thresholds,
                  "per-property thresholds (continuous properties)");
  sub->add_option("--n,--corpus.n", o.n, "synthetic corpus size");
  sub->add_option("--target-rate,--corpus.target_rate", o.target_rate,
                  "synthetic target fraction");
  sub->add_option("--decoy-rate,--corpus.decoy_rate", o.decoy_rate,
                  "synthetic per-cluster decoy fraction");
  sub->add_option("--label-noise,--corpus.label_noise", o.label_noise,
                  "synthetic per-property flip probability");
  sub->add_option("--min-len,--corpus.min_len", o.min_len);
  sub->add_option("--max-len,--corpus.max_len", o.max_len);
  sub->add_option("--corpus-seed,--corpus.seed", o.corpus_seed,
                  "synthetic generator seed");
}

void add_model_options(CLI::App* sub, Options& o) {
  sub->add_option("--encoder,--encoder.kind", o.encoder_kind,
                  "kmer | onehot | table");
  sub->add_option("--kmer-k,--encoder.k", o.kmer_k, "k-mer order, 1..3");
  sub->add_option("--encoder.normalize", o.normalize);
  sub->add_option("--table,--encoder.table", o.table_path,
                  "embedding table CSV (table encoder)");
  sub->add_option("--hidden,--bnn.hidden", o.hidden, "hidden layer widths");
  sub->add_option("--prior-std,--bnn.prior_std", o.prior_std);
  sub->add_option("--mc-samples,--bnn.mc_samples", o.mc_samples,
                  "posterior draws per prediction");
  sub->add_option("--lr,--train.learning_rate", o.learning_rate);
  sub->add_option("--epochs,--train.epochs", o.epochs);
  sub->add_option("--batch-size,--train.batch_size", o.batch_size);
  sub->add_option("--mc-train,--train.mc_train_samples", o.mc_train);
  sub->add_option("--kl-scale,--train.kl_scale", o.kl_scale,
                  "<= 0 selects 1/n (full-ELBO share per example)");
  sub->add_option("--beta0,--schedule.beta0", o.beta0);
  sub->add_option("--kappa,--schedule.kappa", o.kappa);
}

void add_run_options(CLI::App* sub, Options& o) {
  sub->add_option("--policy,--policy.name", o.policy,
                  "random | pure | al | ucb | rd-ucb | al-ucb | hil | "
                  "human-first");
  sub->add_option("--switch-round,--policy.switch_round", o.switch_round,
                  "Then-variant switch; 0 = ceil(R/2)");
  sub->add_option("--expert-p,--expert.p", o.expert_p,
                  "expert disclosure probability");
  sub->add_option("--expert.meta_visible", o.meta_visible);
  sub->add_flag("--no-meta", o.no_meta, "hide scores from the expert");
  sub->add_option("--split,--expert.split", o.split,
                  "ramp(lo,hi) | const(x)");
  sub->add_option("--B,--run.B", o.B, "batch size per round");
  sub->add_option("--R,--run.R", o.R, "rounds");
  sub->add_option("--q,--run.q", o.q, "uncertainty batch size");
  sub->add_option("--h,--run.h", o.h, "search batch size");
  sub->add_option("--n-test,--run.n_test", o.n_test, "holdout size");
  sub->add_option("--seed,--run.seed", o.seed);
  sub->add_option("--out,--run.out", o.out, "output directory");
  sub->add_option("--retrain,--run.retrain", o.retrain, "warm | fresh")
      ->check(CLI::IsMember({"warm", "fresh"}));
}

// CLI11 reads [section] config keys as subcommand scopes, but these sections
// are option groups shared by every subcommand. Rebind each key onto the one
// parsed subcommand as a dotted name so it matches its --section.key alias.
struct SectionConfig : CLI::ConfigTOML {
  const CLI::App* root = nullptr;
  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    auto items = CLI::ConfigTOML::from_config(in);
    const auto parsed = root->get_subcommands();
    std::vector<CLI::ConfigItem> rebound;
    for (auto& item : items) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      for (auto it = item.parents.rbegin(); it != item.parents.rend(); ++it)
        item.name = *it + "." + item.name;
      item.parents.clear();
      if (!parsed.empty()) item.parents = {parsed.front()->get_name()};
      rebound.push_back(std::move(item));
    }
    return rebound;
  }
};

void add_config_file(CLI::App* sub) {
  // --config lives on the root app; fall through so it parses after the
  // subcommand name, where users naturally put it.
  sub->fallthrough();
}

sd::ExpertProfile parse_expert(const Options& o) {
  sd::ExpertProfile profile;
  profile.knowledge_p = o.expert_p;
  profile.meta_visible = o.no_meta ? false : o.meta_visible;
  double a = 0, b = 0;
  if (std::sscanf(o.split.c_str(), "ramp(%lf,%lf)", &a, &b) == 2) {
    profile.split_kind = sd::ExpertProfile::SplitKind::Ramp;
    profile.split_lo = a;
    profile.split_hi = b;
  } else if (std::sscanf(o.split.c_str(), "const(%lf)", &a) == 1) {
    profile.split_kind = sd::ExpertProfile::SplitKind::Const;
    profile.split_lo = a;
    profile.split_hi = a;
  } else {
    throw sd::ConfigInvalid("split must be ramp(lo,hi) or const(x): " +
                            o.split);
  }
  return profile;
}

sd::TargetSpec parse_target(const Options& o) {
  if (o.thresholds.empty()) return sd::binary_target_spec(o.properties);
  sd::TargetSpec spec;
  spec.property_names = o.properties;
  spec.thresholds = o.thresholds;
  spec.modes.assign(o.properties.size(), sd::PropertyMode::Continuous);
  spec.validate();
  if (spec.thresholds.size() != spec.property_names.size())
    throw sd::ConfigInvalid("thresholds must match properties");
  return spec;
}

sd::Corpus load_or_synth(const Options& o) {
  if (!o.data.empty())
    return sd::load_corpus(o.data, parse_target(o), sd::amino_acid_alphabet());
  sd::SynthSpec spec;
  spec.n = o.n;
  spec.target_rate = o.target_rate;
  spec.decoy_rate = o.decoy_rate;
  spec.label_noise = o.label_noise;
  spec.min_len = o.min_len;
  spec.max_len = o.max_len;
  spec.seed = o.corpus_seed;
  return sd::make_synth_corpus(spec);
}

sd::RunConfig build_run_config(const Options& o) {
  sd::RunConfig cfg;
  cfg.B = o.B;
  cfg.R = o.R;
  cfg.q = o.q;
  cfg.h = o.h;
  cfg.n_test = o.n_test;
  cfg.seed = o.seed;
  if (o.encoder_kind == "kmer") cfg.encoder.kind = sd::EncoderKind::Kmer;
  else if (o.encoder_kind == "onehot")
    cfg.encoder.kind = sd::EncoderKind::Onehot;
  else if (o.encoder_kind == "table")
    cfg.encoder.kind = sd::EncoderKind::Table;
  else throw sd::ConfigInvalid("unknown encoder: " + o.encoder_kind);
  cfg.encoder.k = o.kmer_k;
  cfg.encoder.normalize = o.normalize;
  cfg.hidden = o.hidden;
  cfg.prior_std = o.prior_std;
  cfg.mc_samples = o.mc_samples;
  cfg.train.learning_rate = o.learning_rate;
  cfg.train.epochs = o.epochs;
  cfg.train.batch_size = o.batch_size;
  cfg.train.mc_train_samples = o.mc_train;
  cfg.train.kl_scale = o.kl_scale;
  cfg.beta.beta0 = o.beta0;
  cfg.beta.kappa = o.kappa;
  cfg.policy.kind = sd::policy_from_name(o.policy);
  cfg.policy.switch_round = o.switch_round;
  cfg.expert = parse_expert(o);
  cfg.retrain = o.retrain == "fresh" ? sd::RetrainMode::Fresh
                                     : sd::RetrainMode::Warm;
  return cfg;
}

std::string out_root() {
  const char* env = std::getenv("SEQDISCOVER_OUT");
  return env && *env ? env : "results";
}

std::string resolve_out(const Options& o, const std::string& stem) {
  return o.out.empty() ? out_root() + "/" + stem : o.out;
}

std::optional<sd::EmbeddingTable> maybe_table(const Options& o) {
  if (o.encoder_kind != "table") return std::nullopt;
  if (o.table_path.empty())
    throw sd::ConfigInvalid("table encoder needs --table");
  return sd::load_embedding_table(o.table_path);
}

int cmd_synth(const Options& o) {
  sd::SynthSpec spec;
  spec.n = o.n;
  spec.target_rate = o.target_rate;
  spec.decoy_rate = o.decoy_rate;
  spec.label_noise = o.label_noise;
  spec.min_len = o.min_len;
  spec.max_len = o.max_len;
  spec.seed = o.corpus_seed;
  sd::Corpus corpus = sd::make_synth_corpus(spec);
  const std::string path = o.out.empty() ? "corpus.csv" : o.out;
  sd::save_corpus_csv(corpus, path);
  std::cout << "wrote " << corpus.size() << " molecules ("
            << corpus.count_targets() << " targets) to " << path << "\n";
  return 0;
}

int cmd_run(const Options& o) {
  sd::Corpus corpus = load_or_synth(o);
  sd::RunConfig cfg = build_run_config(o);
  auto table = maybe_table(o);
  sd::RunSummary summary =
      sd::run(cfg, corpus, table ? &*table : nullptr);
  const std::string dir = resolve_out(
      o, o.policy + "-seed" + std::to_string(o.seed));
  sd::write_run_results(dir, cfg, summary);
  std::cout << "policy=" << o.policy << " seed=" << o.seed
            << " hits=" << summary.total_hits << " hit_rate="
            << summary.hit_rate << " recall=" << summary.final_recall
            << " -> " << dir << "\n";
  return 0;
}

int cmd_replicate(const Options& o) {
  sd::Corpus corpus = load_or_synth(o);
  sd::RunConfig cfg = build_run_config(o);
  auto table = maybe_table(o);
  sd::AggregateReport report = sd::replicate(cfg, corpus, o.reps, o.seed,
                                             table ? &*table : nullptr);
  const std::string dir = resolve_out(
      o, o.policy + "-reps" + std::to_string(o.reps) + "-seed" +
             std::to_string(o.seed));
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    char sub[32];
    std::snprintf(sub, sizeof sub, "/run-%03zu", i);
    sd::RunConfig echo = cfg;
    echo.seed = report.runs[i].seed;
    sd::write_run_results(dir + sub, echo, report.runs[i]);
  }
  sd::write_aggregate_csv(dir + "/aggregate.csv", report);
  std::cout << "policy=" << o.policy << " reps=" << o.reps
            << " hit_rate_mean=" << report.hit_rate_mean
            << " hit_rate_std=" << report.hit_rate_std << " -> " << dir
            << "\n";
  return 0;
}

int cmd_serve(const Options& o, const std::string& host, int port) {
  sd::Corpus corpus = load_or_synth(o);
  Options base = o;
  base.policy = "hil";
  sd::RunConfig cfg = build_run_config(base);
  sd::Service service(std::move(corpus), std::move(cfg));
  const int bound = service.start(host, port);
  std::cout << "listening on http://" << host << ":" << bound << "\n";
  service.wait();
  return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out) {
  struct Bucket {
    std::vector<double> hit_rates, recalls;
  };
  std::map<std::string, Bucket> by_policy;
  for (const auto& dir : dirs) {
    std::ifstream in(dir + "/summary.json");
    if (!in) throw sd::ParseError("no summary.json under " + dir);
    json j;
    in >> j;
    auto& b = by_policy[j.at("config").at("policy").get<std::string>()];
    b.hit_rates.push_back(j.at("hit_rate").get<double>());
    b.recalls.push_back(j.at("final_recall").get<double>());
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  auto pstd = [&](const std::vector<double>& v) {
    double m = mean(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size()));
  };
  std::ostringstream csv;
  csv << "policy,runs,hit_rate_mean,hit_rate_std,recall_mean,recall_std\n";
  char buf[160];
  for (const auto& [name, b] : by_policy) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.10g,%.10g,%.10g,%.10g\n",
                  name.c_str(), b.hit_rates.size(), mean(b.hit_rates),
                  pstd(b.hit_rates), mean(b.recalls), pstd(b.recalls));
    csv << buf;
  }
  std::cout << csv.str();
  if (!out.empty()) {
    std::ofstream f(out);
    f << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential molecular discovery workbench"};
  // --h is a real option below, so help keeps only its long spelling.
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  auto section_config = std::make_shared<SectionConfig>();
  section_config->root = &app;
  app.set_config("--config", "", "TOML config file");
  app.config_formatter(section_config);
  // unmatched config keys are tolerated, unmatched flags are still errors
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  Options o;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> report_dirs;
  std::string report_out;

  auto* synth = app.add_subcommand("synth", "emit a synthetic corpus CSV");
  add_corpus_options(synth, o);
  synth->add_option("--out,--run.out", o.out, "output CSV path");
  add_config_file(synth);

  auto* runc = app.add_subcommand("run", "run one experiment");
  add_corpus_options(runc, o);
  add_model_options(runc, o);
  add_run_options(runc, o);
  add_config_file(runc);

  auto* repl = app.add_subcommand("replicate", "n runs plus aggregate bands");
  add_corpus_options(repl, o);
  add_model_options(repl, o);
  add_run_options(repl, o);
  repl->add_option("--reps,--run.reps", o.reps, "replication count");
  add_config_file(repl);

  auto* serve = app.add_subcommand("serve", "interactive HTTP sessions");
  add_corpus_options(serve, o);
  add_model_options(serve, o);
  add_run_options(serve, o);
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  add_config_file(serve);

  auto* report = app.add_subcommand("report", "aggregate results directories");
  report->add_option("dirs", report_dirs, "results directories")->required();
  report->add_option("--out", report_out, "also write the CSV here");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(o);
    if (runc->parsed()) return cmd_run(o);
    if (repl->parsed()) return cmd_replicate(o);
    if (serve->parsed()) return cmd_serve(o, host, port);
    if (report->parsed()) return cmd_report(report_dirs, report_out);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const sd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
