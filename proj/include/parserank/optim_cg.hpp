#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "parserank/corpus.hpp"
#include "parserank/loglinear.hpp"

namespace parserank {

struct CgConfig {
  std::size_t max_iterations = 500;
  double objective_rel_tol = 1e-8;
  double gradient_norm_tol = 1e-6;
  double line_search_tol = 1e-4;
  // Iterations between forced steepest-ascent restarts; 0 means "number of
  // active parameters" (the dimension when the caller does not know).
  std::size_t restart_period = 0;
  // Keep every accepted iterate in the trace.
  bool record_iterates = false;

  void validate() const;
};

enum class CgTermination {
  gradient_tolerance,
  objective_tolerance,
  max_iterations,
  // Neither the conjugate nor the steepest-ascent direction could be
  // improved upon at machine precision.
  line_search_stalled,
};

std::string to_string(CgTermination reason);

struct CgIteration {
  double objective = 0.0;
  double gradient_norm = 0.0;  // max-norm
  double step = 0.0;           // Euclidean length of the accepted move
  bool restarted = false;
};

struct CgTrace {
  double initial_objective = 0.0;
  std::vector<CgIteration> iterations;
  std::vector<ParameterVector> iterates;  // only with record_iterates
  CgTermination reason = CgTermination::max_iterations;
  std::size_t evaluations = 0;
};

struct CgResult {
  ParameterVector theta;
  ObjectiveReport final;
  CgTrace trace;
};

using GradientObjective = std::function<ObjectiveReport(const ParameterVector&)>;

// Polak-Ribiere conjugate-gradient ascent with golden-section bracketing
// and Brent refinement along each direction. Every accepted step strictly
// increases the objective. Throws NumericalError on a non-finite objective
// or gradient, and when the line search cannot find an ascent step along
// a non-negligible gradient.
CgResult maximize(const GradientObjective& objective, ParameterVector theta0, const CgConfig& config);

struct PlTrainOptions {
  double sigma_multiplier = 7.0;
  bool regularize = true;
  ExecPolicy exec;
};

struct PlTrainResult {
  ParameterVector theta;
  RegularizerSpec regularizer;
  CgTrace trace;
  std::vector<std::string> warnings;
};

// Maximizes the regularized log pseudo-likelihood from theta = 0. Features
// that never occur stay frozen at zero.
PlTrainResult train_pl(const Corpus& corpus, const CgConfig& config, const PlTrainOptions& options = {});

// Components that moved strictly in one direction over every recorded
// iterate and ended at magnitude >= min_magnitude; the signature of a
// parameter being driven toward infinity. Needs record_iterates.
std::vector<FeatureIndex> drifting_parameters(const CgTrace& trace, double min_magnitude);

}  // namespace parserank
