#include "parserank/diagnostics.hpp"

namespace parserank {

namespace {

// Exact comparisons: feature values are counts in the intended use.
FeatureDiagnosis examine(const Corpus& corpus, FeatureIndex j) {
  FeatureDiagnosis d;
  d.feature = j;
  for (const auto& s : corpus.sentences()) {
    const double correct = s.correct_parse().get(j);
    bool varies = false, above = false, below = false;
    for (const auto& p : s.parses) {
      const double v = p.get(j);
      varies |= v != correct;
      above |= v > correct;
      below |= v < correct;
    }
    if (varies && !d.varies_in) d.varies_in = s.id;
    if (above && !d.exceeds_correct_in) d.exceeds_correct_in = s.id;
    if (below && !d.below_correct_in) d.below_correct_in = s.id;
  }
  d.pseudo_constant = !d.varies_in;
  d.pseudo_maximal = !d.pseudo_constant && !d.exceeds_correct_in;
  d.pseudo_minimal = !d.pseudo_constant && !d.below_correct_in;
  return d;
}

}  // namespace

std::set<FeatureIndex> pseudo_constant_features(const Corpus& corpus) {
  std::set<FeatureIndex> out;
  for (FeatureIndex j = 0; j < corpus.num_features(); ++j) {
    if (examine(corpus, j).pseudo_constant) out.insert(j);
  }
  return out;
}

std::set<FeatureIndex> pseudo_maximal_features(const Corpus& corpus) {
  std::set<FeatureIndex> out;
  for (FeatureIndex j = 0; j < corpus.num_features(); ++j) {
    if (examine(corpus, j).pseudo_maximal) out.insert(j);
  }
  return out;
}

std::set<FeatureIndex> pseudo_minimal_features(const Corpus& corpus) {
  std::set<FeatureIndex> out;
  for (FeatureIndex j = 0; j < corpus.num_features(); ++j) {
    if (examine(corpus, j).pseudo_minimal) out.insert(j);
  }
  return out;
}

DiagnosticsReport diagnose(const Corpus& corpus, int jobs) {
  const auto m = static_cast<std::ptrdiff_t>(corpus.num_features());
  DiagnosticsReport report;
  report.n_features = corpus.num_features();
  report.features.resize(corpus.num_features());
#pragma omp parallel for num_threads(jobs < 1 ? 1 : jobs) schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < m; ++j) report.features[j] = examine(corpus, static_cast<FeatureIndex>(j));

  for (const auto& d : report.features) {
    report.n_pseudo_constant += d.pseudo_constant;
    report.n_pseudo_maximal += d.pseudo_maximal;
    report.n_pseudo_minimal += d.pseudo_minimal;
    if (corpus.catalog().name(d.feature).starts_with(kRuleFeaturePrefix)) ++report.n_rule_features;
  }
  return report;
}

}  // namespace parserank
