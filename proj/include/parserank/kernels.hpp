#pragma once

// Per-sentence reduction kernels behind the log-linear model. Each kernel
// comes in a serial reference form and an OpenMP form; the reference is
// what the tests compare the parallel path against.

#include <span>
#include <vector>

#include "parserank/corpus.hpp"

namespace parserank::kernels {

// Sum over sentences of log P(correct | yield), and of
// f(correct) - E[f | yield]. The second sum is accumulated as
// sum_k P(k) (f(correct) - f(k)), so a feature that takes one value across a
// candidate set contributes exactly zero.
struct PlTerms {
  double log_pl = 0.0;
  std::vector<double> residual;
};

// Default tolerance for deciding that two parse scores tie.
inline constexpr double kTieTolerance = 1e-9;

// Scores are tied when |a - b| <= tol * max(1, |max score|).
double sentence_correct_credit(std::span<const double> theta, const Sentence& s, double tie_tol);

PlTerms pl_terms_serial(std::span<const double> theta, const Corpus& corpus);
double log_pl_serial(std::span<const double> theta, const Corpus& corpus);
double correct_count_serial(std::span<const double> theta, const Corpus& corpus, double tie_tol);

PlTerms pl_terms_omp(std::span<const double> theta, const Corpus& corpus, int jobs, bool deterministic);
double log_pl_omp(std::span<const double> theta, const Corpus& corpus, int jobs, bool deterministic);
double correct_count_omp(std::span<const double> theta, const Corpus& corpus, double tie_tol, int jobs,
                         bool deterministic);

namespace detail {

double sparse_dot(std::span<const double> theta, const FeatureVector& f);

// Fills `scores` with theta . f for each parse and returns log sum exp.
double score_parses(std::span<const double> theta, const Sentence& s, std::vector<double>& scores);

// Scratch buffers for one worker; acc and mark have length m and are left
// cleared after every call.
struct Workspace {
  explicit Workspace(std::size_t m) : acc(m, 0.0), mark(m, 0) {}
  std::vector<double> scores;
  std::vector<double> acc;
  std::vector<unsigned char> mark;
  std::vector<FeatureIndex> touched;
};

// f(correct) - E[f | yield] for one sentence as (index, value) pairs in
// first-touch order. Returns log P(correct | yield).
double sentence_residual(std::span<const double> theta, const Sentence& s, Workspace& ws,
                            std::vector<FeatureVector::Entry>& out);

}  // namespace detail

}  // namespace parserank::kernels
