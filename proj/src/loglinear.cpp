#include "parserank/loglinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parserank/errors.hpp"
#include "parserank/kernels.hpp"

namespace parserank {

ParameterVector::ParameterVector(std::vector<double> values) : theta(std::move(values)) {
  if (!all_finite()) throw NumericalError("parameter vector has non-finite components");
}

bool ParameterVector::all_finite() const {
  return std::all_of(theta.begin(), theta.end(), [](double v) { return std::isfinite(v); });
}

std::size_t RegularizerSpec::num_active() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

RegularizerSpec RegularizerSpec::unregularized(std::size_t m) {
  return RegularizerSpec{std::vector<double>(m, std::numeric_limits<double>::infinity()),
                         std::vector<bool>(m, true)};
}

namespace {

void check_dims(const ParameterVector& theta, const Corpus& corpus) {
  if (theta.size() != corpus.num_features()) {
    throw DataError("parameter vector has " + std::to_string(theta.size()) + " components but the catalog has " +
                    std::to_string(corpus.num_features()) + " features");
  }
}

kernels::PlTerms pl_terms(const ParameterVector& theta, const Corpus& corpus, const ExecPolicy& exec) {
  if (exec.jobs <= 1) return kernels::pl_terms_serial(theta.theta, corpus);
  return kernels::pl_terms_omp(theta.theta, corpus, exec.jobs, exec.deterministic);
}

}  // namespace

double score(const ParameterVector& theta, const FeatureVector& parse) {
  return kernels::detail::sparse_dot(theta.theta, parse);
}

std::vector<double> conditional_log_probs(const ParameterVector& theta, const Sentence& sentence) {
  std::vector<double> scores;
  const double lse = kernels::detail::score_parses(theta.theta, sentence, scores);
  for (double& v : scores) v -= lse;
  return scores;
}

std::vector<double> conditional_expectations(const ParameterVector& theta, const Sentence& sentence) {
  const auto lp = conditional_log_probs(theta, sentence);
  std::vector<double> dense(theta.size(), 0.0);
  for (std::size_t k = 0; k < lp.size(); ++k) {
    const double p = std::exp(lp[k]);
    for (const auto& e : sentence.parses[k].entries()) dense[e.index] += p * e.value;
  }
  return dense;
}

double log_pseudo_likelihood(const ParameterVector& theta, const Corpus& corpus, const ExecPolicy& exec) {
  check_dims(theta, corpus);
  if (exec.jobs <= 1) return kernels::log_pl_serial(theta.theta, corpus);
  return kernels::log_pl_omp(theta.theta, corpus, exec.jobs, exec.deterministic);
}

std::vector<double> pl_gradient(const ParameterVector& theta, const Corpus& corpus, const ExecPolicy& exec) {
  check_dims(theta, corpus);
  return pl_terms(theta, corpus, exec).residual;
}

RegularizerSpec compute_sigmas(const Corpus& corpus, double multiplier) {
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) {
    throw ConfigError("sigma multiplier must be a positive finite number");
  }
  const std::size_t m = corpus.num_features();
  std::vector<double> max_value(m, 0.0);
  for (const auto& s : corpus.sentences()) {
    for (const auto& p : s.parses) {
      for (const auto& e : p.entries()) max_value[e.index] = std::max(max_value[e.index], std::abs(e.value));
    }
  }
  RegularizerSpec reg;
  reg.sigmas.assign(m, 0.0);
  reg.active.assign(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    if (max_value[j] > 0.0) {
      reg.sigmas[j] = multiplier * max_value[j];
      reg.active[j] = true;
    }
  }
  return reg;
}

PlObjective::PlObjective(const Corpus& corpus, RegularizerSpec reg, ExecPolicy exec)
    : corpus_(&corpus), reg_(std::move(reg)), exec_(exec) {
  if (reg_.sigmas.size() != corpus.num_features() || reg_.active.size() != corpus.num_features()) {
    throw ConfigError("regularizer dimension does not match the feature catalog");
  }
  for (std::size_t j = 0; j < reg_.size(); ++j) {
    if (reg_.active[j] && !(reg_.sigmas[j] > 0.0)) {
      throw ConfigError("regularizer width for feature '" + corpus.catalog().name(j) + "' is not positive");
    }
  }
}

ObjectiveReport PlObjective::operator()(const ParameterVector& theta) const {
  check_dims(theta, *corpus_);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (!reg_.active[j] && theta[j] != 0.0) {
      throw ConfigError("feature '" + corpus_->catalog().name(j) + "' is frozen but has a nonzero parameter");
    }
  }
  const auto terms = pl_terms(theta, *corpus_, exec_);
  ObjectiveReport report;
  report.value = terms.log_pl;
  report.gradient.assign(theta.size(), 0.0);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (!reg_.active[j]) continue;
    const double var = reg_.sigmas[j] * reg_.sigmas[j];
    report.value -= theta[j] * theta[j] / (2.0 * var);
    report.gradient[j] = terms.residual[j] - theta[j] / var;
  }
  return report;
}

ObjectiveReport regularized_objective(const ParameterVector& theta, const Corpus& corpus,
                                      const RegularizerSpec& reg, const ExecPolicy& exec) {
  return PlObjective(corpus, reg, exec)(theta);
}

}  // namespace parserank
