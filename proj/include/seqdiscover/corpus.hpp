#pragma once
// Search-pool bookkeeping: dataset ingestion, the ground-truth oracle that
// stands in for the laboratory, and the labeled/unlabeled partition the
// round loop mutates.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "seqdiscover/rng.hpp"

namespace seqdiscover {

using BigInt = boost::multiprecision::cpp_int;
using LabelVector = std::vector<double>;

struct AlphabetSpec {
  std::string symbols;  // ordered, no duplicates
  int max_len = 0;

  void validate() const;
  bool contains(char c) const { return symbols.find(c) != std::string::npos; }
  int size() const { return static_cast<int>(symbols.size()); }
};

AlphabetSpec amino_acid_alphabet(int max_len = 50);

struct Molecule {
  std::string id;
  std::string sequence;
};

enum class PropertyMode { Binary, Continuous };

struct TargetSpec {
  std::vector<std::string> property_names;
  std::vector<double> thresholds;        // h_k; 1 for binary
  std::vector<PropertyMode> modes;

  void validate() const;
  int num_properties() const { return static_cast<int>(property_names.size()); }
};

TargetSpec binary_target_spec(std::vector<std::string> names);

// True iff every label meets its threshold (hard comparison, no tolerance).
bool is_target(const LabelVector& labels, const TargetSpec& spec);

// Immutable after load. Ground truth is deliberately narrow: only reveal()
// and the expert-disclosure path read labels, so policy code cannot peek.
class Corpus {
 public:
  Corpus(AlphabetSpec alphabet, std::vector<Molecule> molecules,
         std::map<std::string, LabelVector> ground_truth, TargetSpec target);

  const AlphabetSpec& alphabet() const { return alphabet_; }
  const TargetSpec& target_spec() const { return target_; }
  const std::vector<Molecule>& molecules() const { return molecules_; }
  std::size_t size() const { return molecules_.size(); }

  const Molecule& molecule(const std::string& id) const;
  bool contains(const std::string& id) const;

  // Oracle access; reserved for reveal, disclosure, and retrospective metrics.
  const LabelVector& true_labels(const std::string& id) const;
  bool is_target_id(const std::string& id) const;
  std::size_t count_targets() const;

 private:
  AlphabetSpec alphabet_;
  TargetSpec target_;
  std::vector<Molecule> molecules_;
  std::map<std::string, LabelVector> ground_truth_;
  std::map<std::string, std::size_t> index_;
};

// CSV ingestion. Header row; optional `id` column (auto m000001-style ids
// when absent), `sequence` column, then one column per target property.
// Extra columns are ignored, so a wide export can feed a narrower spec.
Corpus load_corpus(const std::string& path, const TargetSpec& target,
                   const AlphabetSpec& alphabet);
Corpus load_corpus(const std::string& path, const TargetSpec& target);

void save_corpus_csv(const Corpus& corpus, const std::string& path);

// |X| = sum_{i=1..L} C^i. Summation handles C=1, where the closed form
// (C^{L+1}-C)/(C-1) is 0/0.
BigInt search_space_size(int component_count, int max_len);

// Deterministic disjoint split; the test part serves as a holdout.
std::pair<Corpus, Corpus> split_holdout(const Corpus& corpus,
                                        std::size_t n_test, Rng rng);

struct PoolState {
  int round = 1;  // t, 1-based
  std::map<std::string, LabelVector> labeled;
  std::set<std::string> unlabeled;  // sorted for deterministic iteration
  std::size_t pool_size = 0;        // J

  static PoolState fresh(const Corpus& corpus);
  void check_partition() const;  // labeled/unlabeled disjoint, sizes sum to J
};

// Moves ids from unlabeled to labeled with ground-truth labels attached and
// advances the round counter. Returns the revealed (id, labels) pairs.
std::vector<std::pair<std::string, LabelVector>> reveal(
    PoolState& pool, const Corpus& corpus,
    const std::vector<std::string>& selected);

}  // namespace seqdiscover
