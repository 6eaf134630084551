#include "parserank/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "parserank/errors.hpp"
#include "parserank/rng.hpp"

namespace parserank {

using nlohmann::json;

FeatureCatalog::FeatureCatalog(std::vector<std::string> names) : names_(std::move(names)) {
  index_.reserve(names_.size());
  for (FeatureIndex j = 0; j < names_.size(); ++j) {
    if (names_[j].empty()) throw DataError("feature name at position " + std::to_string(j) + " is empty");
    if (!index_.emplace(names_[j], j).second) throw DataError("duplicate feature name '" + names_[j] + "'");
  }
}

FeatureIndex FeatureCatalog::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? names_.size() : it->second;
}

FeatureVector::FeatureVector(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  for (const auto& e : entries) {
    if (!entries_.empty() && entries_.back().index == e.index) {
      entries_.back().value += e.value;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
}

FeatureVector FeatureVector::from_dense(std::span<const double> dense) {
  FeatureVector v;
  for (FeatureIndex j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) v.entries_.push_back({j, dense[j]});
  }
  return v;
}

double FeatureVector::get(FeatureIndex j) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), j,
                             [](const Entry& e, FeatureIndex k) { return e.index < k; });
  return (it != entries_.end() && it->index == j) ? it->value : 0.0;
}

std::vector<double> FeatureVector::to_dense(std::size_t m) const {
  std::vector<double> dense(m, 0.0);
  for (const auto& e : entries_) dense.at(e.index) = e.value;
  return dense;
}

Corpus::Corpus(FeatureCatalog catalog, std::vector<Sentence> sentences)
    : catalog_(std::move(catalog)), sentences_(std::move(sentences)) {
  if (sentences_.empty()) throw DataError("corpus has no sentences");
  std::unordered_set<std::string> ids;
  for (const auto& s : sentences_) {
    if (!ids.insert(s.id).second) throw DataError("duplicate sentence id '" + s.id + "'");
    if (s.parses.empty()) throw DataError("sentence '" + s.id + "' has no parses");
    if (s.correct >= s.parses.size()) {
      throw DataError("sentence '" + s.id + "': correct index " + std::to_string(s.correct) +
                      " out of range for " + std::to_string(s.parses.size()) + " parses");
    }
    for (const auto& p : s.parses) {
      if (p.index_bound() > catalog_.size()) {
        throw DataError("sentence '" + s.id + "': feature index out of catalog range");
      }
      for (const auto& e : p.entries()) {
        if (!std::isfinite(e.value)) throw DataError("sentence '" + s.id + "': non-finite feature value");
      }
    }
  }
}

namespace {

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& sentence_id,
                          const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": ";
  if (!sentence_id.empty()) msg << "sentence '" << sentence_id << "': ";
  msg << what;
  throw DataError(msg.str());
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

Corpus read_corpus(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  FeatureCatalog catalog;
  std::vector<Sentence> sentences;
  std::unordered_set<std::string> seen_ids;

  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(source_name, line_no, "", std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) fail_at(source_name, line_no, "", "record is not a JSON object");

    if (!have_header) {
      auto it = record.find("features");
      if (it == record.end() || !it->is_array()) {
        fail_at(source_name, line_no, "", "first record must be a header with a \"features\" array");
      }
      std::vector<std::string> names;
      for (const auto& n : *it) {
        if (!n.is_string()) fail_at(source_name, line_no, "", "feature names must be strings");
        names.push_back(n.get<std::string>());
      }
      try {
        catalog = FeatureCatalog(std::move(names));
      } catch (const DataError& e) {
        fail_at(source_name, line_no, "", e.what());
      }
      have_header = true;
      continue;
    }

    Sentence s;
    auto id = record.find("id");
    if (id == record.end() || !id->is_string()) fail_at(source_name, line_no, "", "missing string \"id\"");
    s.id = id->get<std::string>();
    if (!seen_ids.insert(s.id).second) fail_at(source_name, line_no, s.id, "duplicate sentence id");

    auto correct = record.find("correct");
    if (correct == record.end() || !correct->is_number_integer()) {
      fail_at(source_name, line_no, s.id, "missing integer \"correct\"");
    }
    auto parses = record.find("parses");
    if (parses == record.end() || !parses->is_array()) {
      fail_at(source_name, line_no, s.id, "missing \"parses\" array");
    }
    if (parses->empty()) fail_at(source_name, line_no, s.id, "\"parses\" is empty");
    for (const auto& p : *parses) {
      if (!p.is_object()) fail_at(source_name, line_no, s.id, "each parse must be an object");
      std::vector<FeatureVector::Entry> entries;
      for (auto it = p.begin(); it != p.end(); ++it) {
        FeatureIndex j = catalog.find(it.key());
        if (j == catalog.size()) fail_at(source_name, line_no, s.id, "unknown feature '" + it.key() + "'");
        if (!it.value().is_number()) {
          fail_at(source_name, line_no, s.id, "value of feature '" + it.key() + "' is not a number");
        }
        double v = it.value().get<double>();
        if (!std::isfinite(v)) fail_at(source_name, line_no, s.id, "non-finite value for '" + it.key() + "'");
        entries.push_back({j, v});
      }
      s.parses.emplace_back(std::move(entries));
    }
    const auto c = correct->get<std::int64_t>();
    if (c < 0 || static_cast<std::size_t>(c) >= s.parses.size()) {
      fail_at(source_name, line_no, s.id,
              "correct index " + std::to_string(c) + " out of range for " + std::to_string(s.parses.size()) +
                  " parses");
    }
    s.correct = static_cast<std::size_t>(c);
    sentences.push_back(std::move(s));
  }
  if (!have_header) fail_at(source_name, line_no, "", "missing header record");
  if (sentences.empty()) fail_at(source_name, line_no, "", "corpus has no sentences");
  return Corpus(std::move(catalog), std::move(sentences));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path.string() + "'");
  return read_corpus(in, path.string());
}

namespace {

json number_json(double v) {
  if (std::trunc(v) == v && std::abs(v) < 9.0e15) return json(static_cast<std::int64_t>(v));
  return json(v);
}

}  // namespace

void write_corpus(std::ostream& out, const Corpus& corpus) {
  out << json{{"features", corpus.catalog().names()}}.dump() << '\n';
  for (const auto& s : corpus.sentences()) {
    // nlohmann sorts object keys; write records by hand to keep a fixed key order.
    out << "{\"id\":" << json(s.id).dump() << ",\"correct\":" << s.correct << ",\"parses\":[";
    for (std::size_t k = 0; k < s.parses.size(); ++k) {
      if (k) out << ',';
      out << '{';
      bool first = true;
      for (const auto& e : s.parses[k].entries()) {
        if (!first) out << ',';
        first = false;
        out << json(corpus.catalog().name(e.index)).dump() << ':' << number_json(e.value).dump();
      }
      out << '}';
    }
    out << "]}\n";
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file '" + path.string() + "'");
  write_corpus(out, corpus);
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.n_sentences = corpus.size();
  for (const auto& s : corpus.sentences()) {
    if (s.ambiguous()) {
      ++stats.n_ambiguous;
      stats.n_parses_of_ambiguous += s.num_parses();
    }
  }
  return stats;
}

std::vector<double> aggregate_feature_totals(const Corpus& corpus) {
  std::vector<double> totals(corpus.num_features(), 0.0);
  for (const auto& s : corpus.sentences()) {
    for (const auto& e : s.correct_parse().entries()) totals[e.index] += e.value;
  }
  return totals;
}

Corpus subset(const Corpus& corpus, std::span<const std::size_t> indices) {
  std::vector<Sentence> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(corpus.sentence(i));
  return Corpus(corpus.catalog(), std::move(picked));
}

std::vector<Fold> split_kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  const std::size_t n = corpus.size();
  if (k < 2 || k > n) {
    throw ConfigError("fold count k=" + std::to_string(k) + " must satisfy 2 <= k <= n=" + std::to_string(n));
  }
  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return corpus.sentence(a).id < corpus.sentence(b).id; });

  std::vector<std::size_t> shuffled = by_id;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);

  std::vector<std::size_t> fold_of(n);
  for (std::size_t p = 0; p < n; ++p) fold_of[shuffled[p]] = p % k;

  std::vector<Fold> folds;
  folds.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i : by_id) (fold_of[i] == f ? test : train).push_back(i);
    folds.push_back(Fold{subset(corpus, train), subset(corpus, test), test});
  }
  return folds;
}

Corpus drop_features(const Corpus& corpus, std::span<const std::string> names) {
  const auto& cat = corpus.catalog();
  std::vector<bool> dropped(cat.size(), false);
  for (const auto& name : names) {
    FeatureIndex j = cat.find(name);
    if (j == cat.size()) throw DataError("cannot drop unknown feature '" + name + "'");
    dropped[j] = true;
  }
  std::vector<std::string> kept_names;
  std::vector<FeatureIndex> remap(cat.size(), cat.size());
  for (FeatureIndex j = 0; j < cat.size(); ++j) {
    if (!dropped[j]) {
      remap[j] = kept_names.size();
      kept_names.push_back(cat.name(j));
    }
  }
  std::vector<Sentence> sentences(corpus.sentences().begin(), corpus.sentences().end());
  for (auto& s : sentences) {
    for (auto& p : s.parses) {
      std::vector<FeatureVector::Entry> entries;
      for (const auto& e : p.entries()) {
        if (!dropped[e.index]) entries.push_back({remap[e.index], e.value});
      }
      p = FeatureVector(std::move(entries));
    }
  }
  return Corpus(FeatureCatalog(std::move(kept_names)), std::move(sentences));
}

}  // namespace parserank
