#include "seqdiscover/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "seqdiscover/errors.hpp"

namespace seqdiscover {

void AlphabetSpec::validate() const {
  if (symbols.empty()) throw InvalidSpec("alphabet symbols empty");
  std::unordered_set<char> seen;
  for (const char c : symbols) {
    if (!seen.insert(c).second)
      throw InvalidSpec(std::string("duplicate alphabet symbol '") + c + "'");
  }
  if (max_len < 1) throw InvalidSpec("alphabet max_len must be >= 1");
}

AlphabetSpec amino_acid_alphabet(int max_len) {
  return AlphabetSpec{"ACDEFGHIKLMNPQRSTVWY", max_len};
}

void TargetSpec::validate() const {
  if (property_names.empty()) throw InvalidSpec("target spec needs K >= 1 properties");
  if (thresholds.size() != property_names.size() ||
      modes.size() != property_names.size())
    throw InvalidSpec("target spec field lengths disagree");
  std::unordered_set<std::string> seen;
  for (const auto& name : property_names) {
    if (!seen.insert(name).second)
      throw InvalidSpec("duplicate property name: " + name);
  }
}

TargetSpec binary_target_spec(std::vector<std::string> names) {
  TargetSpec spec;
  spec.property_names = std::move(names);
  spec.thresholds.assign(spec.property_names.size(), 1.0);
  spec.modes.assign(spec.property_names.size(), PropertyMode::Binary);
  spec.validate();
  return spec;
}

bool is_target(const LabelVector& labels, const TargetSpec& spec) {
  if (labels.size() != spec.thresholds.size())
    throw LengthMismatch("label vector length != K");
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] < spec.thresholds[k]) return false;
  }
  return true;
}

Corpus::Corpus(AlphabetSpec alphabet, std::vector<Molecule> molecules,
               std::map<std::string, LabelVector> ground_truth, TargetSpec target)
    : alphabet_(std::move(alphabet)),
      target_(std::move(target)),
      molecules_(std::move(molecules)),
      ground_truth_(std::move(ground_truth)) {
  alphabet_.validate();
  target_.validate();
  const std::size_t num        = static_cast<std::size_t>(target_.num_properties());
  for (std::size_t i = 0; i < molecules_.size(); ++i) {
    const Molecule& m = molecules_[i];
    if (!index_.emplace(m.id, i).second) throw DuplicateId(m.id);
    if (m.sequence.empty() ||
        m.sequence.size() > static_cast<std::size_t>(alphabet_.max_len))
      throw BadSymbol("sequence length outside [1, L] for id " + m.id);
    for (const char c : m.sequence) {
      if (!alphabet_.contains(c))
        throw BadSymbol(std::string("'") + c + "' in id " + m.id);
    }
    const auto it = ground_truth_.find(m.id);
    if (it == ground_truth_.end())
      throw InvalidSpec("ground truth missing for id " + m.id);
    if (it->second.size() != num)
      throw LengthMismatch("ground truth length != K for id " + m.id);
  }
}

const Molecule& Corpus::molecule(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw UnknownId(id);
  return molecules_[it->second];
}

bool Corpus::contains(const std::string& id) const {
  return index_.count(id) != 0;
}

const LabelVector& Corpus::true_labels(const std::string& id) const {
  const auto it = ground_truth_.find(id);
  if (it == ground_truth_.end()) throw UnknownId(id);
  return it->second;
}

bool Corpus::is_target_id(const std::string& id) const {
  return is_target(true_labels(id), target_);
}

std::size_t Corpus::count_targets() const {
  std::size_t n = 0;
  for (const auto& m : molecules_) {
    if (is_target_id(m.id)) ++n;
  }
  return n;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_label(const std::string& field, PropertyMode mode,
                   const std::string& where) {
  double v = 0.0;
  try {
    std::size_t pos = 0;
    v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
  } catch (const std::exception&) {
    throw ParseError("bad label value '" + field + "' " + where);
  }
  if (mode == PropertyMode::Binary && v != 0.0 && v != 1.0)
    throw ParseError("binary label must be 0 or 1, got '" + field + "' " + where);
  return v;
}

std::string auto_id(std::size_t row) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "m%06zu", row);
  return buf;
}

}  // namespace

Corpus load_corpus(const std::string& path, const TargetSpec& target,
                   const AlphabetSpec& alphabet) {
  target.validate();
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty file " + path);
  const auto columns = split_csv_line(header);

  int id_col = -1;
  int seq_col = -1;
  std::vector<int> prop_cols(target.property_names.size(), -1);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const std::string name = trim(columns[c]);
    if (name == "id") id_col = static_cast<int>(c);
    if (name == "sequence" || name == "seq") seq_col = static_cast<int>(c);
    for (std::size_t k = 0; k < target.property_names.size(); ++k) {
      if (name == target.property_names[k]) prop_cols[k] = static_cast<int>(c);
    }
  }
  if (seq_col < 0) throw MissingColumn("sequence");
  for (std::size_t k = 0; k < prop_cols.size(); ++k) {
    if (prop_cols[k] < 0) throw MissingColumn(target.property_names[k]);
  }

  std::vector<Molecule> molecules;
  std::map<std::string, LabelVector> truth;
  AlphabetSpec ab = alphabet;
  std::size_t row = 0;
  std::string line;
  std::size_t longest = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() < columns.size())
      throw ParseError("row " + std::to_string(row) + " has too few fields");
    Molecule m;
    m.id = id_col >= 0 ? trim(fields[id_col]) : auto_id(row);
    m.sequence = trim(fields[seq_col]);
    longest = std::max(longest, m.sequence.size());
    LabelVector labels(prop_cols.size());
    for (std::size_t k = 0; k < prop_cols.size(); ++k) {
      labels[k] = parse_label(trim(fields[prop_cols[k]]), target.modes[k],
                              "at row " + std::to_string(row));
    }
    if (!truth.emplace(m.id, std::move(labels)).second) throw DuplicateId(m.id);
    molecules.push_back(std::move(m));
  }
  if (molecules.empty()) throw ParseError("no data rows in " + path);
  if (ab.max_len <= 0) ab.max_len = static_cast<int>(longest);  // infer L
  return Corpus(std::move(ab), std::move(molecules), std::move(truth), target);
}

Corpus load_corpus(const std::string& path, const TargetSpec& target) {
  return load_corpus(path, target, amino_acid_alphabet(0));
}

void save_corpus_csv(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "id,sequence";
  for (const auto& name : corpus.target_spec().property_names) out << ',' << name;
  out << '\n';
  char buf[32];
  for (const auto& m : corpus.molecules()) {
    out << m.id << ',' << m.sequence;
    for (const double v : corpus.true_labels(m.id)) {
      std::snprintf(buf, sizeof(buf), "%.10g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

BigInt search_space_size(int component_count, int max_len) {
  if (component_count < 1 || max_len < 1)
    throw InvalidSpec("search_space_size needs C >= 1 and L >= 1");
  BigInt total = 0;
  BigInt power = 1;
  for (int i = 1; i <= max_len; ++i) {
    power *= component_count;
    total += power;
  }
  return total;
}

std::pair<Corpus, Corpus> split_holdout(const Corpus& corpus,
                                        std::size_t n_test, Rng rng) {
  if (n_test >= corpus.size() && !(n_test == 0 && corpus.size() > 0))
    throw NTestTooLarge(std::to_string(n_test) + " of " +
                        std::to_string(corpus.size()));
  const auto& mols = corpus.molecules();
  const auto picks = rng.sample_indices(mols.size(), n_test);
  std::unordered_set<std::size_t> test_idx(picks.begin(), picks.end());

  std::vector<Molecule> pool_m, test_m;
  std::map<std::string, LabelVector> pool_y, test_y;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    const auto& m = mols[i];
    if (test_idx.count(i)) {
      test_m.push_back(m);
      test_y.emplace(m.id, corpus.true_labels(m.id));
    } else {
      pool_m.push_back(m);
      pool_y.emplace(m.id, corpus.true_labels(m.id));
    }
  }
  Corpus pool(corpus.alphabet(), std::move(pool_m), std::move(pool_y),
              corpus.target_spec());
  Corpus test(corpus.alphabet(), std::move(test_m), std::move(test_y),
              corpus.target_spec());
  return {std::move(pool), std::move(test)};
}

PoolState PoolState::fresh(const Corpus& corpus) {
  PoolState state;
  state.pool_size = corpus.size();
  for (const auto& m : corpus.molecules()) state.unlabeled.insert(m.id);
  return state;
}

void PoolState::check_partition() const {
  if (labeled.size() + unlabeled.size() != pool_size)
    throw InvalidSpec("pool partition sizes do not sum to J");
  for (const auto& [id, labels] : labeled) {
    (void)labels;
    if (unlabeled.count(id))
      throw InvalidSpec("id in both labeled and unlabeled: " + id);
  }
}

std::vector<std::pair<std::string, LabelVector>> reveal(
    PoolState& pool, const Corpus& corpus,
    const std::vector<std::string>& selected) {
  // Validate the whole batch before mutating anything.
  std::unordered_set<std::string> batch;
  for (const auto& id : selected) {
    if (pool.labeled.count(id) || batch.count(id)) throw AlreadyLabeled(id);
    if (!pool.unlabeled.count(id)) throw UnknownId(id);
    batch.insert(id);
  }
  std::vector<std::pair<std::string, LabelVector>> out;
  out.reserve(selected.size());
  for (const auto& id : selected) {
    const LabelVector& labels = corpus.true_labels(id);
    pool.unlabeled.erase(id);
    pool.labeled.emplace(id, labels);
    out.emplace_back(id, labels);
  }
  pool.round += 1;
  return out;
}

}  // namespace seqdiscover
