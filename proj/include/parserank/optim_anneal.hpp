#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "parserank/corpus.hpp"
#include "parserank/kernels.hpp"
#include "parserank/loglinear.hpp"

namespace parserank {

// Number of sentences whose highest-scoring parse is the correct one. A
// sentence whose correct parse ties with l-1 others for the top score
// earns 1/l.
double objective_C(const ParameterVector& theta, const Corpus& corpus,
                   double tie_tol = kernels::kTieTolerance, const ExecPolicy& exec = {});

struct AnnealConfig {
  double initial_temperature = 1.0;
  double cooling_factor = 0.95;
  // 0 means 100 * number of parameters.
  std::size_t moves_per_temperature = 0;
  double min_temperature = 1e-3;
  std::uint64_t seed = 0;
  double simplex_scale = 1.0;
  double parameter_box = 100.0;
  double tie_tol = kernels::kTieTolerance;

  void validate() const;
};

struct AnnealStage {
  double temperature = 0.0;
  double best_C = 0.0;
  double acceptance_rate = 0.0;
};

struct AnnealTrace {
  std::vector<AnnealStage> stages;
  double final_temperature = 0.0;
  std::string reason;
  std::size_t evaluations = 0;
};

struct AnnealResult {
  ParameterVector theta;
  double best_C = 0.0;
  double best_log_pl = 0.0;
  AnnealTrace trace;
};

// Annealed downhill simplex over the box |theta_j| <= B. At every
// temperature the simplex is rebuilt around the incumbent; the best point
// ever evaluated is returned, ranking first by C and then by log PL.
AnnealResult maximize_correct(const Corpus& corpus, const ParameterVector& theta0, const AnnealConfig& config,
                              const ExecPolicy& exec = {});

// Runs independent chains (seeds derived from config.seed) and keeps the
// best; ties go to the lowest chain index.
AnnealResult maximize_correct_chains(const Corpus& corpus, const ParameterVector& theta0,
                                     const AnnealConfig& config, std::size_t chains, int jobs = 1);

}  // namespace parserank
