#include <doctest.h>

#include <cmath>

#include "parserank/errors.hpp"
#include "parserank/evalharness.hpp"
#include "parserank/synthlab.hpp"
#include "support.hpp"

using namespace parserank;
using testsupport::make_corpus;

namespace {

double uniform_C(const Corpus& c) {
  double s = 0.0;
  for (const auto& x : c.sentences()) s += 1.0 / static_cast<double>(x.num_parses());
  return s;
}

double uniform_neg_log_pl(const Corpus& c) {
  double s = 0.0;
  for (const auto& x : c.sentences()) s += std::log(static_cast<double>(x.num_parses()));
  return s;
}

EstimatorSettings fast_settings() {
  EstimatorSettings s;
  s.anneal.cooling_factor = 0.7;
  s.anneal.moves_per_temperature = 60;
  return s;
}

}  // namespace

TEST_CASE("baseline parameters and closed-form baseline scores") {
  const auto b = baseline_params(testsupport::numbered_catalog(3));
  CHECK(b == ParameterVector({0.0, 0.0, 0.0}));

  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Corpus c = testsupport::random_corpus(rng, 4, 1 + rng.below(40), 7);
    const auto s = evaluate(baseline_params(c.catalog()), c);
    CHECK(s.correct_count == doctest::Approx(uniform_C(c)).epsilon(1e-14));
    CHECK(s.neg_log_pl == doctest::Approx(uniform_neg_log_pl(c)).epsilon(1e-14));
    CHECK(s.n_test == c.size());
    for (const auto& sent : c.sentences()) {
      for (double lp : conditional_log_probs(baseline_params(c.catalog()), sent)) {
        CHECK(lp == doctest::Approx(-std::log(static_cast<double>(sent.num_parses()))));
      }
    }
  }
}

TEST_CASE("evaluate agrees with the model metrics bit for bit") {
  Rng rng(42);
  const Corpus c = testsupport::random_corpus(rng, 5, 30, 5);
  const auto theta = testsupport::random_theta(rng, 5, -1, 1);
  const auto s = evaluate(theta, c);
  CHECK(s.neg_log_pl == -log_pseudo_likelihood(theta, c));
  CHECK(s.correct_count == objective_C(theta, c));
  CHECK(s.correct_percent == doctest::Approx(100.0 * s.correct_count / 30.0));
  CHECK(s.neg_log_pl >= 0.0);
  CHECK_THROWS_AS(evaluate(ParameterVector::zeros(4), c), DataError);
}

TEST_CASE("a separating theta scores 100% with -log PL shrinking as it grows") {
  const Corpus c = make_corpus(1, {{{{1}, {0}, {0}}, 0}, {{{0}, {1}}, 1}, {{{1}, {0}, {0}, {0}}, 0}});
  double prev = INFINITY;
  for (double t : {1.0, 2.0, 5.0, 10.0, 30.0}) {
    const auto s = evaluate(ParameterVector({t}), c);
    CHECK(s.correct_percent == 100.0);
    CHECK(s.neg_log_pl < prev);
    prev = s.neg_log_pl;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("leave-one-out baseline sums to the closed form") {
  const Corpus c = make_corpus(1, {{{{1}, {0}}, 0}, {{{1}, {0}, {2}}, 1}, {{{3}}, 0}, {{{1}, {1}, {0}, {2}}, 3}});
  const std::vector<Estimator> est{Estimator::baseline};
  const auto r = cross_validate(c, 4, est, 7);
  CHECK(r.overall[0].correct_count == doctest::Approx(0.5 + 1.0 / 3 + 1 + 0.25));
  CHECK(r.overall[0].neg_log_pl == doctest::Approx(std::log(2.0) + std::log(3.0) + std::log(4.0)));
}

TEST_CASE("cross-validation report is additive, order-invariant and parallel-safe") {
  Rng rng(43);
  const Corpus c = testsupport::random_corpus(rng, 4, 40, 4, 3, 0.6);
  const std::vector<Estimator> est{Estimator::baseline, Estimator::pseudo_likelihood, Estimator::correct_parses};
  const auto settings = fast_settings();
  const auto r = cross_validate(c, 5, est, 3, settings);
  REQUIRE(r.folds.size() == 5);
  for (std::size_t e = 0; e < est.size(); ++e) {
    double C = 0, nl = 0;
    std::size_t n = 0;
    for (const auto& f : r.folds) {
      C += f.scores[e].correct_count;
      nl += f.scores[e].neg_log_pl;
      n += f.scores[e].n_test;
    }
    CHECK(r.overall[e].correct_count == C);
    CHECK(r.overall[e].neg_log_pl == nl);
    CHECK(n == c.size());
  }

  std::vector<std::size_t> reversed;
  for (std::size_t i = c.size(); i-- > 0;) reversed.push_back(i);
  const Corpus shuffled = subset(c, reversed);
  const auto r2 = cross_validate(shuffled, 5, est, 3, settings);
  const auto r3 = cross_validate(c, 5, est, 3, settings, 4);
  for (std::size_t f = 0; f < 5; ++f) {
    for (std::size_t e = 0; e < est.size(); ++e) {
      CHECK(r2.folds[f].scores[e].correct_count == r.folds[f].scores[e].correct_count);
      CHECK(r2.folds[f].scores[e].neg_log_pl == r.folds[f].scores[e].neg_log_pl);
      CHECK(r3.folds[f].scores[e].neg_log_pl == r.folds[f].scores[e].neg_log_pl);
      CHECK(r3.folds[f].scores[e].correct_count == r.folds[f].scores[e].correct_count);
    }
  }
}

TEST_CASE("PL beats the baseline on a synthetic corpus from a known model") {
  Rng rng(44);
  const auto universe = testsupport::random_universe(rng, 5, 25, 6);
  const auto theta_star = testsupport::random_theta(rng, 5, -1, 1);
  const Corpus c = generate_corpus(GroundTruth{theta_star, universe}, 200, 1);
  const std::vector<Estimator> est{Estimator::baseline, Estimator::pseudo_likelihood};
  const auto r = cross_validate(c, 10, est, 1);
  CHECK(r.overall[1].correct_count > r.overall[0].correct_count);
  CHECK(r.overall[1].neg_log_pl < r.overall[0].neg_log_pl);
}

TEST_CASE("estimator names") {
  CHECK(parse_estimator("pl") == Estimator::pseudo_likelihood);
  CHECK(estimator_key(parse_estimator("correct")) == "correct");
  CHECK(estimator_label(Estimator::baseline) == "Baseline estimator");
  CHECK_THROWS_AS(parse_estimator("ml"), ConfigError);
}
