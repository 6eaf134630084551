#include <algorithm>
#include <cmath>
#include <limits>

#include "parserank/kernels.hpp"

namespace parserank::kernels {

namespace detail {

double sparse_dot(std::span<const double> theta, const FeatureVector& f) {
  double s = 0.0;
  for (const auto& e : f.entries()) s += theta[e.index] * e.value;
  return s;
}

double score_parses(std::span<const double> theta, const Sentence& s, std::vector<double>& scores) {
  scores.resize(s.parses.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.parses.size(); ++k) {
    scores[k] = sparse_dot(theta, s.parses[k]);
    top = std::max(top, scores[k]);
  }
  double sum = 0.0;
  for (double v : scores) sum += std::exp(v - top);
  return top + std::log(sum);
}

double sentence_residual(std::span<const double> theta, const Sentence& s, Workspace& ws,
                         std::vector<FeatureVector::Entry>& out) {
  const double lse = score_parses(theta, s, ws.scores);
  const auto& gold = s.parses[s.correct].entries();
  auto add = [&](FeatureIndex j, double v) {
    if (!ws.mark[j]) {
      ws.mark[j] = 1;
      ws.touched.push_back(j);
    }
    ws.acc[j] += v;
  };
  for (std::size_t k = 0; k < s.parses.size(); ++k) {
    if (k == s.correct) continue;
    const double p = std::exp(ws.scores[k] - lse);
    const auto& other = s.parses[k].entries();
    // Merge the two sorted supports; equal values contribute nothing.
    std::size_t a = 0, b = 0;
    while (a < gold.size() || b < other.size()) {
      if (b == other.size() || (a < gold.size() && gold[a].index < other[b].index)) {
        add(gold[a].index, p * gold[a].value);
        ++a;
      } else if (a == gold.size() || other[b].index < gold[a].index) {
        add(other[b].index, -p * other[b].value);
        ++b;
      } else {
        if (gold[a].value != other[b].value) add(gold[a].index, p * (gold[a].value - other[b].value));
        ++a;
        ++b;
      }
    }
  }
  out.clear();
  for (FeatureIndex j : ws.touched) {
    out.push_back({j, ws.acc[j]});
    ws.acc[j] = 0.0;
    ws.mark[j] = 0;
  }
  ws.touched.clear();
  return ws.scores[s.correct] - lse;
}

}  // namespace detail

double sentence_correct_credit(std::span<const double> theta, const Sentence& s, double tie_tol) {
  if (s.parses.size() == 1) return 1.0;
  double top = -std::numeric_limits<double>::infinity();
  double correct_score = 0.0;
  for (std::size_t k = 0; k < s.parses.size(); ++k) {
    const double v = detail::sparse_dot(theta, s.parses[k]);
    top = std::max(top, v);
    if (k == s.correct) correct_score = v;
  }
  const double band = tie_tol * std::max(1.0, std::abs(top));
  if (top - correct_score > band) return 0.0;
  std::size_t ties = 0;
  for (const auto& p : s.parses) {
    if (top - detail::sparse_dot(theta, p) <= band) ++ties;
  }
  return 1.0 / static_cast<double>(ties);
}

PlTerms pl_terms_serial(std::span<const double> theta, const Corpus& corpus) {
  PlTerms terms;
  terms.residual.assign(corpus.num_features(), 0.0);
  detail::Workspace ws(corpus.num_features());
  std::vector<FeatureVector::Entry> e;
  for (const auto& s : corpus.sentences()) {
    terms.log_pl += detail::sentence_residual(theta, s, ws, e);
    for (const auto& [j, v] : e) terms.residual[j] += v;
  }
  return terms;
}

double log_pl_serial(std::span<const double> theta, const Corpus& corpus) {
  double total = 0.0;
  std::vector<double> scores;
  for (const auto& s : corpus.sentences()) {
    const double lse = detail::score_parses(theta, s, scores);
    total += scores[s.correct] - lse;
  }
  return total;
}

double correct_count_serial(std::span<const double> theta, const Corpus& corpus, double tie_tol) {
  double total = 0.0;
  for (const auto& s : corpus.sentences()) total += sentence_correct_credit(theta, s, tie_tol);
  return total;
}

}  // namespace parserank::kernels
