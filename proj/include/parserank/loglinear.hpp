#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "parserank/corpus.hpp"

namespace parserank {

// Dense parameter vector theta aligned with a FeatureCatalog.
struct ParameterVector {
  std::vector<double> theta;

  ParameterVector() = default;
  explicit ParameterVector(std::vector<double> values);
  static ParameterVector zeros(std::size_t m) { return ParameterVector(std::vector<double>(m, 0.0)); }

  std::size_t size() const { return theta.size(); }
  double operator[](std::size_t j) const { return theta[j]; }
  double& operator[](std::size_t j) { return theta[j]; }
  bool all_finite() const;
  bool operator==(const ParameterVector&) const = default;
};

// Per-feature Gaussian prior widths. Inactive features are frozen at zero.
struct RegularizerSpec {
  std::vector<double> sigmas;
  std::vector<bool> active;

  std::size_t size() const { return sigmas.size(); }
  std::size_t num_active() const;
  // Prior-free spec: every feature active with an infinite width.
  static RegularizerSpec unregularized(std::size_t m);
};

struct ObjectiveReport {
  double value = 0.0;
  std::vector<double> gradient;
};

// How per-sentence sums are evaluated. jobs == 1 runs the serial reference
// kernels. With deterministic set, parallel kernels reduce in sentence
// order and reproduce the serial result bit for bit.
struct ExecPolicy {
  int jobs = 1;
  bool deterministic = true;
};

double score(const ParameterVector& theta, const FeatureVector& parse);

// log P(parse | yield) for every candidate, normalized with a max-shifted
// log-sum-exp.
std::vector<double> conditional_log_probs(const ParameterVector& theta, const Sentence& sentence);

// E_theta[f | yield] as a dense vector of length theta.size().
std::vector<double> conditional_expectations(const ParameterVector& theta, const Sentence& sentence);

double log_pseudo_likelihood(const ParameterVector& theta, const Corpus& corpus, const ExecPolicy& exec = {});

// Observed feature totals minus summed conditional expectations; the exact
// gradient of log_pseudo_likelihood.
std::vector<double> pl_gradient(const ParameterVector& theta, const Corpus& corpus, const ExecPolicy& exec = {});

// sigma_j = multiplier * max over every parse (correct or not) of |f_j|.
// Features that are zero on every parse are marked inactive.
RegularizerSpec compute_sigmas(const Corpus& corpus, double multiplier = 7.0);

// log PL - sum_j theta_j^2 / (2 sigma_j^2) with its gradient. Inactive
// components of the gradient are zero.
ObjectiveReport regularized_objective(const ParameterVector& theta, const Corpus& corpus,
                                      const RegularizerSpec& reg, const ExecPolicy& exec = {});

// Reusable evaluator for the regularized objective over a fixed corpus and
// regularizer.
class PlObjective {
 public:
  PlObjective(const Corpus& corpus, RegularizerSpec reg, ExecPolicy exec = {});

  ObjectiveReport operator()(const ParameterVector& theta) const;
  const RegularizerSpec& regularizer() const { return reg_; }

 private:
  const Corpus* corpus_;
  RegularizerSpec reg_;
  ExecPolicy exec_;
};

}  // namespace parserank
