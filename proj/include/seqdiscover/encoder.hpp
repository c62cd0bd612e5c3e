#pragma once
// Sequence featurization. Three interchangeable encoders: k-mer count blocks,
// positional one-hot, and a precomputed embedding table loaded from file
// (the stand-in for an external protein language model).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqdiscover/corpus.hpp"

namespace seqdiscover {

using FeatureVector = std::vector<double>;

enum class EncoderKind { Kmer, Onehot, Table };

struct EncoderSpec {
  EncoderKind kind = EncoderKind::Kmer;
  int k = 1;              // kmer only, 1..3
  bool normalize = true;  // kmer: divide each j-mer block by its total count
  int dim = 0;            // derived for kmer/onehot; file-declared for table

  // Fills `dim` from the alphabet (kmer: sum of C^j for j<=k; onehot: C*L).
  // Table dim comes from the loaded file instead.
  void resolve_dim(const AlphabetSpec& alphabet);
  void validate() const;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::map<std::string, FeatureVector> rows, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  bool contains(const std::string& id) const { return rows_.count(id) != 0; }
  const FeatureVector& at(const std::string& id) const;

 private:
  std::map<std::string, FeatureVector> rows_;
  int dim_ = 0;
};

// CSV with header `id,v0,v1,...,v{d-1}`.
EmbeddingTable load_embedding_table(const std::string& path);

// Pure function of (sequence, spec, table): identical inputs give bitwise
// identical output.
FeatureVector encode(const Molecule& molecule, const AlphabetSpec& alphabet,
                     const EncoderSpec& spec,
                     const EmbeddingTable* table = nullptr);

}  // namespace seqdiscover
