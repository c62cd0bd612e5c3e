#include "seqdiscover/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "seqdiscover/errors.hpp"
#include "seqdiscover/rng.hpp"

namespace seqdiscover {
namespace {

// Signal groups over the amino-acid alphabet; the remaining 14 symbols are
// background. Groups are disjoint so per-property composition signals do
// not interfere.
constexpr std::array<const char*, 3> kGroups = {"AC", "DE", "FG"};
constexpr const char* kBackground = "HIKLMNPQRSTVWY";

enum class Category { Target, Decoy0, Decoy1, Decoy2, Background };

// Per-position sampling weights: (group0, group1, group2, background).
std::array<double, 4> profile_for(Category c) {
  switch (c) {
    case Category::Target: return {0.22, 0.22, 0.22, 0.34};
    case Category::Decoy0: return {0.02, 0.28, 0.28, 0.42};  // misses p0
    case Category::Decoy1: return {0.28, 0.02, 0.28, 0.42};
    case Category::Decoy2: return {0.28, 0.28, 0.02, 0.42};
    case Category::Background: return {0.04, 0.04, 0.04, 0.88};
  }
  return {};
}

LabelVector labels_for(Category c) {
  switch (c) {
    case Category::Target: return {1, 1, 1};
    case Category::Decoy0: return {0, 1, 1};
    case Category::Decoy1: return {1, 0, 1};
    case Category::Decoy2: return {1, 1, 0};
    case Category::Background: return {0, 0, 0};
  }
  return {};
}

std::string sample_sequence(Category c, std::size_t len, Rng& rng) {
  const auto w = profile_for(c);
  std::string s;
  s.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    double u = rng.uniform();
    const char* bucket;
    if (u < w[0]) bucket = kGroups[0];
    else if (u < w[0] + w[1]) bucket = kGroups[1];
    else if (u < w[0] + w[1] + w[2]) bucket = kGroups[2];
    else bucket = kBackground;
    std::string_view sv(bucket);
    s.push_back(sv[rng.uniform_index(sv.size())]);
  }
  return s;
}

}  // namespace

void SynthSpec::validate() const {
  if (n < 1) throw ConfigInvalid("corpus size must be positive");
  if (!(target_rate >= 0.0 && target_rate <= 1.0) ||
      !(decoy_rate >= 0.0 && decoy_rate <= 1.0))
    throw ConfigInvalid("rates must lie in [0, 1]");
  if (target_rate + 3.0 * decoy_rate > 1.0)
    throw ConfigInvalid("rates exceed the corpus");
  if (!(label_noise >= 0.0 && label_noise <= 1.0))
    throw ConfigInvalid("label_noise must lie in [0, 1]");
  if (min_len < 1 || max_len < min_len)
    throw ConfigInvalid("need 1 <= min_len <= max_len");
}

TargetSpec synth_target_spec() {
  return binary_target_spec({"p0", "p1", "p2"});
}

Corpus make_synth_corpus(const SynthSpec& spec) {
  spec.validate();
  Rng rng = Rng(spec.seed).derive("synth");

  // Category assignment is shuffled so target ids are not clustered at
  // either end of the id range (rankers break ties by ascending id).
  std::vector<Category> cats(spec.n, Category::Background);
  std::size_t pos = 0;
  const auto plant = [&](Category c, std::size_t count) {
    for (std::size_t i = 0; i < count && pos < spec.n; ++i) cats[pos++] = c;
  };
  plant(Category::Target, std::size_t(std::lround(double(spec.n) * spec.target_rate)));
  const auto n_decoy = std::size_t(std::lround(double(spec.n) * spec.decoy_rate));
  plant(Category::Decoy0, n_decoy);
  plant(Category::Decoy1, n_decoy);
  plant(Category::Decoy2, n_decoy);
  rng.shuffle(cats);

  std::vector<Molecule> molecules;
  std::map<std::string, LabelVector> truth;
  molecules.reserve(spec.n);
  char buf[16];
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::snprintf(buf, sizeof buf, "m%06zu", i + 1);
    const std::size_t len =
        spec.min_len + rng.uniform_index(spec.max_len - spec.min_len + 1);
    molecules.push_back({buf, sample_sequence(cats[i], len, rng)});
    LabelVector lab = labels_for(cats[i]);
    for (double& v : lab)
      if (rng.bernoulli(spec.label_noise)) v = 1.0 - v;
    truth.emplace(buf, std::move(lab));
  }
  return Corpus(amino_acid_alphabet(), std::move(molecules), std::move(truth),
                synth_target_spec());
}

}  // namespace seqdiscover
