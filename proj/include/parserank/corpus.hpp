#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace parserank {

using FeatureIndex = std::size_t;

// Ordered, unique feature names. Position in the list is the feature index.
class FeatureCatalog {
 public:
  FeatureCatalog() = default;
  explicit FeatureCatalog(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(FeatureIndex j) const { return names_.at(j); }

  // Index of `name`, or size() when absent.
  FeatureIndex find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != size(); }

  bool operator==(const FeatureCatalog& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, FeatureIndex> index_;
};

// Sparse feature vector f(parse). Entries are sorted by index, unique, and
// never hold an explicit zero.
class FeatureVector {
 public:
  struct Entry {
    FeatureIndex index;
    double value;
    bool operator==(const Entry&) const = default;
  };

  FeatureVector() = default;
  // Accepts entries in any order; duplicate indices are summed and zeros dropped.
  explicit FeatureVector(std::vector<Entry> entries);
  static FeatureVector from_dense(std::span<const double> dense);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Value of feature j (zero when not stored).
  double get(FeatureIndex j) const;
  // One past the largest stored index, 0 for the empty vector.
  FeatureIndex index_bound() const { return entries_.empty() ? 0 : entries_.back().index + 1; }

  std::vector<double> to_dense(std::size_t m) const;

  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<Entry> entries_;
};

// One yield with its enumerated candidate parses and the correct one.
struct Sentence {
  std::string id;
  std::vector<FeatureVector> parses;
  std::size_t correct = 0;

  std::size_t num_parses() const { return parses.size(); }
  bool ambiguous() const { return parses.size() >= 2; }
  const FeatureVector& correct_parse() const { return parses.at(correct); }
};

// A validated parse-ranking corpus. Construction checks every invariant,
// so a Corpus value is always consistent with its catalog.
class Corpus {
 public:
  Corpus(FeatureCatalog catalog, std::vector<Sentence> sentences);

  const FeatureCatalog& catalog() const { return catalog_; }
  std::span<const Sentence> sentences() const { return sentences_; }
  const Sentence& sentence(std::size_t i) const { return sentences_.at(i); }
  std::size_t size() const { return sentences_.size(); }
  std::size_t num_features() const { return catalog_.size(); }

 private:
  FeatureCatalog catalog_;
  std::vector<Sentence> sentences_;
};

struct CorpusStats {
  std::size_t n_sentences = 0;
  std::size_t n_ambiguous = 0;
  std::size_t n_parses_of_ambiguous = 0;
  bool operator==(const CorpusStats&) const = default;
};

struct Fold {
  Corpus train;
  Corpus test;
  // Positions of the test sentences in the source corpus.
  std::vector<std::size_t> test_indices;
};

// JSON Lines corpus format. Errors name the line and, when known, the
// sentence id.
Corpus read_corpus(std::istream& in, const std::string& source_name = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

CorpusStats corpus_stats(const Corpus& corpus);

// Sum over sentences of the correct parse's feature vector.
std::vector<double> aggregate_feature_totals(const Corpus& corpus);

// Randomly assigns sentences to k folds whose sizes differ by at most one.
// Assignment depends only on the set of sentence ids, not their order in
// the corpus; inside every fold sentences are listed in id order.
std::vector<Fold> split_kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed);

// Copy of `corpus` restricted to the sentences at `indices` (in that order).
Corpus subset(const Corpus& corpus, std::span<const std::size_t> indices);

// Removes the named features from the catalog and every parse.
Corpus drop_features(const Corpus& corpus, std::span<const std::string> names);

}  // namespace parserank
