#include <doctest.h>

#include "parserank/kernels.hpp"
#include "parserank/loglinear.hpp"
#include "parserank/optim_anneal.hpp"
#include "support.hpp"

using namespace parserank;

TEST_CASE("deterministic OpenMP kernels reproduce the serial reference bit for bit") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng.below(30);
    const Corpus c = testsupport::random_corpus(rng, m, 1 + rng.below(300), 8);
    const auto theta = testsupport::random_theta(rng, m, -2, 2);
    const auto ref = kernels::pl_terms_serial(theta.theta, c);
    for (int jobs : {2, 3, 8}) {
      const auto par = kernels::pl_terms_omp(theta.theta, c, jobs, true);
      CHECK(par.log_pl == ref.log_pl);
      CHECK(par.residual == ref.residual);
      CHECK(kernels::log_pl_omp(theta.theta, c, jobs, true) == kernels::log_pl_serial(theta.theta, c));
      CHECK(kernels::correct_count_omp(theta.theta, c, 1e-9, jobs, true) ==
            kernels::correct_count_serial(theta.theta, c, 1e-9));
    }
    CHECK(kernels::log_pl_serial(theta.theta, c) == ref.log_pl);
  }
}

TEST_CASE("non-deterministic OpenMP kernels agree to rounding") {
  Rng rng(32);
  const Corpus c = testsupport::random_corpus(rng, 20, 500, 6);
  const auto theta = testsupport::random_theta(rng, 20, -1, 1);
  const auto ref = kernels::pl_terms_serial(theta.theta, c);
  const auto par = kernels::pl_terms_omp(theta.theta, c, 4, false);
  CHECK(par.log_pl == doctest::Approx(ref.log_pl).epsilon(1e-12));
  for (std::size_t j = 0; j < 20; ++j) {
    CHECK(par.residual[j] == doctest::Approx(ref.residual[j]).epsilon(1e-12));
  }
  CHECK(kernels::log_pl_omp(theta.theta, c, 4, false) == doctest::Approx(ref.log_pl).epsilon(1e-12));
  CHECK(kernels::correct_count_omp(theta.theta, c, 1e-9, 4, false) ==
        doctest::Approx(kernels::correct_count_serial(theta.theta, c, 1e-9)));
}

TEST_CASE("public API dispatches on ExecPolicy without changing results") {
  Rng rng(33);
  const Corpus c = testsupport::random_corpus(rng, 10, 120, 5);
  const auto theta = testsupport::random_theta(rng, 10, -2, 2);
  const ExecPolicy par{4, true};
  CHECK(log_pseudo_likelihood(theta, c, par) == log_pseudo_likelihood(theta, c));
  CHECK(pl_gradient(theta, c, par) == pl_gradient(theta, c));
  CHECK(objective_C(theta, c, 1e-9, par) == objective_C(theta, c));
  const auto reg = compute_sigmas(c);
  ParameterVector t = theta;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!reg.active[j]) t[j] = 0;
  }
  const auto a = regularized_objective(t, c, reg, par);
  const auto b = regularized_objective(t, c, reg);
  CHECK(a.value == b.value);
  CHECK(a.gradient == b.gradient);
}

TEST_CASE("sentence credit follows the 1/l tie rule") {
  const Corpus c = testsupport::make_corpus(1, {{{{1}, {1}, {0}, {1}}, 3}, {{{1}, {2}}, 0}, {{{5}}, 0}});
  const std::vector<double> theta{1.0};
  CHECK(kernels::sentence_correct_credit(theta, c.sentence(0), 1e-9) == doctest::Approx(1.0 / 3.0));
  CHECK(kernels::sentence_correct_credit(theta, c.sentence(1), 1e-9) == 0.0);
  CHECK(kernels::sentence_correct_credit(theta, c.sentence(2), 1e-9) == 1.0);
}
