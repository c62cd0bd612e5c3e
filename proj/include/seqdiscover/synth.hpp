#pragma once
// Synthetic peptide corpus with targets planted as composition clusters.
// Three disjoint signal symbol groups, one per property; a sequence's
// category fixes which groups dominate its composition, so k-mer features
// carry the label signal. Decoy clusters sit one property short of target
// status to make the discrimination non-trivial.

#include <cstdint>

#include "seqdiscover/corpus.hpp"

namespace seqdiscover {

struct SynthSpec {
  std::size_t n = 2000;
  double target_rate = 0.015;  // fraction planted as full targets
  double decoy_rate = 0.03;    // fraction per decoy cluster (one per property)
  double label_noise = 0.02;   // independent per-property flip probability
  std::size_t min_len = 10;
  std::size_t max_len = 14;
  std::uint64_t seed = 1;

  void validate() const;
};

// Property names are p0, p1, p2 with binary labels; thresholds 0.5.
TargetSpec synth_target_spec();

Corpus make_synth_corpus(const SynthSpec& spec);

}  // namespace seqdiscover
