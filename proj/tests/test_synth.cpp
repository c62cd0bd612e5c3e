#include "seqdiscover/synth.hpp"

#include <cmath>
#include <set>

#include <doctest.h>

#include "seqdiscover/errors.hpp"

using namespace seqdiscover;

TEST_CASE("generator respects counts, lengths, and the alphabet") {
  SynthSpec spec;
  spec.n = 1000;
  spec.seed = 5;
  auto corpus = make_synth_corpus(spec);
  CHECK(corpus.size() == 1000);
  CHECK(corpus.target_spec().num_properties() == 3);

  for (const auto& m : corpus.molecules()) {
    CHECK(m.sequence.size() >= spec.min_len);
    CHECK(m.sequence.size() <= spec.max_len);
    for (char c : m.sequence) CHECK(corpus.alphabet().contains(c));
  }

  std::set<std::string> ids;
  for (const auto& m : corpus.molecules()) ids.insert(m.id);
  CHECK(ids.size() == 1000);
}

TEST_CASE("target prevalence tracks the configured rate") {
  SynthSpec spec;
  spec.n = 4000;
  spec.target_rate = 0.015;
  spec.label_noise = 0.0;
  spec.seed = 11;
  auto corpus = make_synth_corpus(spec);
  // with zero label noise the planted count is exact
  CHECK(corpus.count_targets() == std::size_t(std::lround(4000 * 0.015)));
}

TEST_CASE("label noise moves prevalence but only modestly") {
  SynthSpec spec;
  spec.n = 4000;
  spec.target_rate = 0.015;
  spec.label_noise = 0.02;
  spec.seed = 11;
  auto corpus = make_synth_corpus(spec);
  const double rate = double(corpus.count_targets()) / 4000.0;
  CHECK(rate > 0.005);
  CHECK(rate < 0.04);
}

TEST_CASE("generation is deterministic in the seed") {
  SynthSpec spec;
  spec.n = 300;
  spec.seed = 21;
  auto a = make_synth_corpus(spec);
  auto b = make_synth_corpus(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.molecules()[i].id == b.molecules()[i].id);
    CHECK(a.molecules()[i].sequence == b.molecules()[i].sequence);
    CHECK(a.true_labels(a.molecules()[i].id) ==
          b.true_labels(b.molecules()[i].id));
  }
  spec.seed = 22;
  auto c = make_synth_corpus(spec);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    any_diff |= a.molecules()[i].sequence != c.molecules()[i].sequence;
  CHECK(any_diff);
}

TEST_CASE("category labels follow the planted composition scheme") {
  SynthSpec spec;
  spec.n = 2000;
  spec.label_noise = 0.0;
  spec.seed = 31;
  auto corpus = make_synth_corpus(spec);
  int full_targets = 0, partials = 0, blanks = 0;
  for (const auto& m : corpus.molecules()) {
    const auto& y = corpus.true_labels(m.id);
    const int sum = int(y[0] + y[1] + y[2]);
    if (sum == 3) ++full_targets;
    else if (sum == 2) ++partials;
    else if (sum == 0) ++blanks;
    else FAIL("unexpected label pattern");
  }
  CHECK(full_targets == std::lround(2000 * spec.target_rate));
  // one decoy cluster per property, each one property short of target
  CHECK(partials == 3 * std::lround(2000 * spec.decoy_rate));
  CHECK(blanks == 2000 - full_targets - partials);
}

TEST_CASE("spec validation guards") {
  SynthSpec bad;
  bad.n = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
  bad = {};
  bad.target_rate = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
  bad = {};
  bad.target_rate = 0.4;
  bad.decoy_rate = 0.3;  // categories would exceed the corpus
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
  bad = {};
  bad.min_len = 8;
  bad.max_len = 6;
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
  bad = {};
  bad.label_noise = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
}
