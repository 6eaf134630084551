#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "parserank/corpus.hpp"
#include "parserank/loglinear.hpp"
#include "parserank/optim_anneal.hpp"
#include "parserank/optim_cg.hpp"

namespace parserank {

struct EvalScores {
  double correct_count = 0.0;  // C with 1/l credit for ties
  double correct_percent = 0.0;
  double neg_log_pl = 0.0;
  std::size_t n_test = 0;
};

EvalScores evaluate(const ParameterVector& theta, const Corpus& test, const ExecPolicy& exec = {},
                    double tie_tol = kernels::kTieTolerance);

// All parameters zero: every candidate parse equally likely.
ParameterVector baseline_params(const FeatureCatalog& catalog);

enum class Estimator { baseline, pseudo_likelihood, correct_parses };

// "baseline", "pl", "correct"
Estimator parse_estimator(const std::string& name);
std::string estimator_key(Estimator e);
// Row label used in reports.
std::string estimator_label(Estimator e);

struct EstimatorSettings {
  CgConfig cg;
  PlTrainOptions pl;
  AnnealConfig anneal;
  std::size_t chains = 1;
};

// Fits `estimator` on `train` with the shared settings. `stream` decorrelates
// annealing seeds between folds.
ParameterVector fit(Estimator estimator, const Corpus& train, const EstimatorSettings& settings,
                    std::uint64_t stream = 0);

struct FoldScores {
  std::size_t n_test = 0;
  std::vector<EvalScores> scores;  // parallel to CrossValReport::estimators
};

struct CrossValReport {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<Estimator> estimators;
  std::vector<FoldScores> folds;
  std::vector<EvalScores> overall;  // fold sums
};

// k-fold cross-validation: every fold is scored by parameters fitted on the
// other k-1 folds and the fold scores are summed. Folds run concurrently
// when jobs > 1; the report is assembled in fold order.
CrossValReport cross_validate(const Corpus& corpus, std::size_t k, std::span<const Estimator> estimators,
                              std::uint64_t seed, const EstimatorSettings& settings = {}, int jobs = 1);

}  // namespace parserank
