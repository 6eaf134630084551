#include "parserank/kernels.hpp"

namespace parserank::kernels {

PlTerms pl_terms_omp(std::span<const double> theta, const Corpus& corpus, int jobs, bool deterministic) {
  const auto sentences = corpus.sentences();
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
  const std::size_t m = corpus.num_features();
  PlTerms terms;
  terms.residual.assign(m, 0.0);

  if (deterministic) {
    // Per-sentence results, folded afterwards in sentence order.
    std::vector<double> log_terms(sentences.size());
    std::vector<std::vector<FeatureVector::Entry>> residuals(sentences.size());
#pragma omp parallel num_threads(jobs)
    {
      detail::Workspace ws(m);
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        log_terms[i] = detail::sentence_residual(theta, sentences[i], ws, residuals[i]);
      }
    }
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      terms.log_pl += log_terms[i];
      for (const auto& [j, v] : residuals[i]) terms.residual[j] += v;
    }
    return terms;
  }

  double log_pl = 0.0;
#pragma omp parallel num_threads(jobs) reduction(+ : log_pl)
  {
    detail::Workspace ws(m);
    std::vector<double> local(m, 0.0);
    std::vector<FeatureVector::Entry> e;
#pragma omp for schedule(dynamic, 16) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      log_pl += detail::sentence_residual(theta, sentences[i], ws, e);
      for (const auto& [j, v] : e) local[j] += v;
    }
#pragma omp critical(parserank_pl_reduce)
    for (std::size_t j = 0; j < m; ++j) terms.residual[j] += local[j];
  }
  terms.log_pl = log_pl;
  return terms;
}

double log_pl_omp(std::span<const double> theta, const Corpus& corpus, int jobs, bool deterministic) {
  const auto sentences = corpus.sentences();
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
  if (deterministic) {
    std::vector<double> log_terms(sentences.size());
#pragma omp parallel num_threads(jobs)
    {
      std::vector<double> scores;
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double lse = detail::score_parses(theta, sentences[i], scores);
        log_terms[i] = scores[sentences[i].correct] - lse;
      }
    }
    double total = 0.0;
    for (double v : log_terms) total += v;
    return total;
  }
  double total = 0.0;
#pragma omp parallel num_threads(jobs) reduction(+ : total)
  {
    std::vector<double> scores;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double lse = detail::score_parses(theta, sentences[i], scores);
      total += scores[sentences[i].correct] - lse;
    }
  }
  return total;
}

double correct_count_omp(std::span<const double> theta, const Corpus& corpus, double tie_tol, int jobs,
                         bool deterministic) {
  const auto sentences = corpus.sentences();
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
  if (deterministic) {
    std::vector<double> credit(sentences.size());
#pragma omp parallel for num_threads(jobs) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) credit[i] = sentence_correct_credit(theta, sentences[i], tie_tol);
    double total = 0.0;
    for (double v : credit) total += v;
    return total;
  }
  double total = 0.0;
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 16) reduction(+ : total)
  for (std::ptrdiff_t i = 0; i < n; ++i) total += sentence_correct_credit(theta, sentences[i], tie_tol);
  return total;
}

}  // namespace parserank::kernels
