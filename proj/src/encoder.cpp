#include "seqdiscover/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {

void EncoderSpec::resolve_dim(const AlphabetSpec& alphabet) {
  const int c = alphabet.size();
  switch (kind) {
    case EncoderKind::Kmer: {
      validate();
      long long d = 0, power = 1;
      for (int j = 1; j <= k; ++j) {
        power *= c;
        d += power;
      }
      dim = static_cast<int>(d);
      break;
    }
    case EncoderKind::Onehot:
      dim = c * alphabet.max_len;
      break;
    case EncoderKind::Table:
      break;  // file-declared
  }
}

void EncoderSpec::validate() const {
  if (kind == EncoderKind::Kmer && (k < 1 || k > 3))
    throw InvalidSpec("kmer k must be in 1..3");
}

EmbeddingTable::EmbeddingTable(std::map<std::string, FeatureVector> rows, int dim)
    : rows_(std::move(rows)), dim_(dim) {
  for (const auto& [id, v] : rows_) {
    if (static_cast<int>(v.size()) != dim_)
      throw RaggedRows("row " + id + " has dim " + std::to_string(v.size()));
  }
}

const FeatureVector& EmbeddingTable::at(const std::string& id) const {
  const auto it = rows_.find(id);
  if (it == rows_.end()) throw MissingEmbedding(id);
  return it->second;
}

EmbeddingTable load_embedding_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty file " + path);

  std::map<std::string, FeatureVector> rows;
  int dim = -1;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    std::stringstream ss(line);
    std::string field;
    if (!std::getline(ss, field, ',')) continue;
    const std::string id = field;
    FeatureVector v;
    while (std::getline(ss, field, ',')) {
      try {
        v.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError("bad value '" + field + "' at row " + std::to_string(row));
      }
    }
    if (v.empty()) throw ParseError("no values at row " + std::to_string(row));
    if (dim < 0) dim = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != dim)
      throw RaggedRows("row " + std::to_string(row) + " has dim " +
                       std::to_string(v.size()) + ", expected " +
                       std::to_string(dim));
    if (!rows.emplace(id, std::move(v)).second) throw DuplicateId(id);
  }
  if (rows.empty()) throw ParseError("no data rows in " + path);
  return EmbeddingTable(std::move(rows), dim);
}

namespace {

FeatureVector encode_kmer(const std::string& seq, const AlphabetSpec& alphabet,
                          const EncoderSpec& spec) {
  const int c = alphabet.size();
  int sym[256];
  std::fill(std::begin(sym), std::end(sym), -1);
  for (int i = 0; i < c; ++i)
    sym[static_cast<unsigned char>(alphabet.symbols[i])] = i;

  FeatureVector out(static_cast<std::size_t>(spec.dim), 0.0);
  std::size_t offset = 0;
  long long block = 1;
  for (int j = 1; j <= spec.k; ++j) {
    block *= c;
    const int len = static_cast<int>(seq.size());
    double total = 0.0;
    // j-gram index in lexicographic order, first symbol most significant.
    for (int start = 0; start + j <= len; ++start) {
      long long idx = 0;
      for (int t = 0; t < j; ++t) {
        idx = idx * c + sym[static_cast<unsigned char>(seq[start + t])];
      }
      out[offset + static_cast<std::size_t>(idx)] += 1.0;
      total += 1.0;
    }
    if (spec.normalize && total > 0.0) {
      for (long long i = 0; i < block; ++i)
        out[offset + static_cast<std::size_t>(i)] /= total;
    }
    offset += static_cast<std::size_t>(block);
  }
  return out;
}

FeatureVector encode_onehot(const std::string& seq, const AlphabetSpec& alphabet,
                            const EncoderSpec& spec) {
  const int c = alphabet.size();
  FeatureVector out(static_cast<std::size_t>(spec.dim), 0.0);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto pos = alphabet.symbols.find(seq[i]);
    out[i * static_cast<std::size_t>(c) + pos] = 1.0;
  }
  return out;
}

}  // namespace

FeatureVector encode(const Molecule& molecule, const AlphabetSpec& alphabet,
                     const EncoderSpec& spec, const EmbeddingTable* table) {
  switch (spec.kind) {
    case EncoderKind::Kmer:
      return encode_kmer(molecule.sequence, alphabet, spec);
    case EncoderKind::Onehot:
      return encode_onehot(molecule.sequence, alphabet, spec);
    case EncoderKind::Table: {
      if (table == nullptr) throw MissingEmbedding("no table provided");
      const FeatureVector& v = table->at(molecule.id);
      if (spec.dim > 0 && static_cast<int>(v.size()) != spec.dim)
        throw DimMismatch("table dim " + std::to_string(v.size()) +
                          " != spec dim " + std::to_string(spec.dim));
      return v;
    }
  }
  throw InvalidSpec("unknown encoder kind");
}

}  // namespace seqdiscover
