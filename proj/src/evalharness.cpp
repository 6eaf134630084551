#include "parserank/evalharness.hpp"

#include <exception>

#include "parserank/errors.hpp"

namespace parserank {

EvalScores evaluate(const ParameterVector& theta, const Corpus& test, const ExecPolicy& exec, double tie_tol) {
  if (theta.size() != test.num_features()) {
    throw DataError("catalog mismatch: parameters have " + std::to_string(theta.size()) +
                    " components, test catalog has " + std::to_string(test.num_features()));
  }
  EvalScores s;
  s.n_test = test.size();
  s.correct_count = objective_C(theta, test, tie_tol, exec);
  s.correct_percent = 100.0 * s.correct_count / static_cast<double>(s.n_test);
  s.neg_log_pl = -log_pseudo_likelihood(theta, test, exec);
  return s;
}

ParameterVector baseline_params(const FeatureCatalog& catalog) { return ParameterVector::zeros(catalog.size()); }

Estimator parse_estimator(const std::string& name) {
  if (name == "baseline") return Estimator::baseline;
  if (name == "pl") return Estimator::pseudo_likelihood;
  if (name == "correct") return Estimator::correct_parses;
  throw ConfigError("unknown estimator '" + name + "' (expected baseline, pl or correct)");
}

std::string estimator_key(Estimator e) {
  switch (e) {
    case Estimator::baseline: return "baseline";
    case Estimator::pseudo_likelihood: return "pl";
    case Estimator::correct_parses: return "correct";
  }
  return "?";
}

std::string estimator_label(Estimator e) {
  switch (e) {
    case Estimator::baseline: return "Baseline estimator";
    case Estimator::pseudo_likelihood: return "Pseudo-likelihood estimator";
    case Estimator::correct_parses: return "Correct-parses estimator";
  }
  return "?";
}

ParameterVector fit(Estimator estimator, const Corpus& train, const EstimatorSettings& settings,
                    std::uint64_t stream) {
  switch (estimator) {
    case Estimator::baseline:
      return baseline_params(train.catalog());
    case Estimator::pseudo_likelihood:
      return train_pl(train, settings.cg, settings.pl).theta;
    case Estimator::correct_parses: {
      AnnealConfig cfg = settings.anneal;
      cfg.seed += stream;
      return maximize_correct_chains(train, baseline_params(train.catalog()), cfg, settings.chains).theta;
    }
  }
  throw ConfigError("unknown estimator");
}

CrossValReport cross_validate(const Corpus& corpus, std::size_t k, std::span<const Estimator> estimators,
                              std::uint64_t seed, const EstimatorSettings& settings, int jobs) {
  if (estimators.empty()) throw ConfigError("no estimators requested");
  const auto folds = split_kfold(corpus, k, seed);

  CrossValReport report;
  report.k = k;
  report.seed = seed;
  report.estimators.assign(estimators.begin(), estimators.end());
  report.folds.resize(k);

  // Fold-level parallelism replaces sentence-level parallelism inside.
  EstimatorSettings inner = settings;
  if (jobs > 1) inner.pl.exec.jobs = 1;

  std::vector<std::exception_ptr> errors(k);
  const auto nf = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for num_threads(jobs < 1 ? 1 : jobs) schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < nf; ++f) {
    try {
      FoldScores fs;
      fs.n_test = folds[f].test.size();
      for (Estimator e : estimators) {
        const auto theta = fit(e, folds[f].train, inner, static_cast<std::uint64_t>(f));
        fs.scores.push_back(evaluate(theta, folds[f].test));
      }
      report.folds[f] = std::move(fs);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  report.overall.assign(estimators.size(), EvalScores{});
  for (const auto& fs : report.folds) {
    for (std::size_t r = 0; r < estimators.size(); ++r) {
      report.overall[r].correct_count += fs.scores[r].correct_count;
      report.overall[r].neg_log_pl += fs.scores[r].neg_log_pl;
      report.overall[r].n_test += fs.scores[r].n_test;
    }
  }
  for (auto& o : report.overall) o.correct_percent = 100.0 * o.correct_count / static_cast<double>(o.n_test);
  return report;
}

}  // namespace parserank
