#include "parserank/optim_anneal.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "parserank/errors.hpp"
#include "parserank/rng.hpp"

namespace parserank {

double objective_C(const ParameterVector& theta, const Corpus& corpus, double tie_tol, const ExecPolicy& exec) {
  if (theta.size() != corpus.num_features()) throw DataError("parameter vector does not match the catalog");
  if (exec.jobs <= 1) return kernels::correct_count_serial(theta.theta, corpus, tie_tol);
  return kernels::correct_count_omp(theta.theta, corpus, tie_tol, exec.jobs, exec.deterministic);
}

void AnnealConfig::validate() const {
  if (!(cooling_factor > 0.0 && cooling_factor < 1.0)) throw ConfigError("cooling factor must lie in (0, 1)");
  if (!(min_temperature > 0.0)) throw ConfigError("minimum temperature must be positive");
  if (!(initial_temperature > min_temperature)) {
    throw ConfigError("initial temperature must exceed the minimum temperature");
  }
  if (!(parameter_box > 0.0) || !std::isfinite(parameter_box)) throw ConfigError("parameter box must be positive");
  if (!(simplex_scale > 0.0)) throw ConfigError("simplex scale must be positive");
  if (!(tie_tol >= 0.0)) throw ConfigError("tie tolerance must be non-negative");
}

namespace {

// C differences are multiples of small fractions; the log PL tie-breaker is
// squashed into [0, kTieBreakWeight) so it never outweighs a C difference.
constexpr double kTieBreakWeight = 1e-6;
constexpr double kCEqualTol = 1e-9;

struct Point {
  double C = 0.0;
  double log_pl = 0.0;
  double energy = 0.0;
};

bool better(const Point& a, const Point& b) {
  if (a.C > b.C + kCEqualTol) return true;
  if (a.C < b.C - kCEqualTol) return false;
  return a.log_pl > b.log_pl;
}

class Annealer {
 public:
  Annealer(const Corpus& corpus, const AnnealConfig& config, const ExecPolicy& exec)
      : corpus_(corpus), config_(config), exec_(exec), rng_(config.seed), dim_(corpus.num_features()) {}

  AnnealResult run(const ParameterVector& theta0) {
    AnnealResult result;
    evaluate(theta0);
    if (std::none_of(corpus_.sentences().begin(), corpus_.sentences().end(),
                     [](const Sentence& s) { return s.ambiguous(); }) ||
        dim_ == 0) {
      return finish(std::move(result), "objective_constant", config_.initial_temperature);
    }

    const std::size_t moves = config_.moves_per_temperature ? config_.moves_per_temperature : 100 * dim_;
    double temperature = config_.initial_temperature;
    while (temperature >= config_.min_temperature) {
      attempts_ = accepted_ = 0;
      anneal_simplex(temperature, moves);
      result.trace.stages.push_back(AnnealStage{temperature, best_.C,
                                                attempts_ ? double(accepted_) / double(attempts_) : 0.0});
      temperature *= config_.cooling_factor;
    }
    return finish(std::move(result), "min_temperature", temperature);
  }

 private:
  AnnealResult finish(AnnealResult result, const char* reason, double temperature) {
    result.theta = best_theta_;
    result.best_C = best_.C;
    result.best_log_pl = best_.log_pl;
    result.trace.reason = reason;
    result.trace.final_temperature = temperature;
    result.trace.evaluations = evaluations_;
    return result;
  }

  ParameterVector clamp(ParameterVector theta) const {
    for (double& v : theta.theta) v = std::clamp(v, -config_.parameter_box, config_.parameter_box);
    return theta;
  }

  Point evaluate(const ParameterVector& theta) {
    ++evaluations_;
    Point p;
    p.C = objective_C(theta, corpus_, config_.tie_tol, exec_);
    p.log_pl = log_pseudo_likelihood(theta, corpus_, exec_);
    const double squashed = -p.log_pl / (1.0 - p.log_pl);  // in [0, 1)
    p.energy = -p.C + kTieBreakWeight * squashed;
    if (!have_best_ || better(p, best_)) {
      have_best_ = true;
      best_ = p;
      best_theta_ = theta;
    }
    return p;
  }

  double thermal(double temperature) { return -temperature * std::log(rng_.uniform_open()); }

  // One temperature stage of the annealed simplex, minimizing energy.
  void anneal_simplex(double temperature, std::size_t budget) {
    const std::size_t mpts = dim_ + 1;
    std::vector<ParameterVector> p(mpts, best_theta_);
    std::vector<double> y(mpts);
    y[0] = best_.energy;
    for (std::size_t i = 1; i < mpts; ++i) {
      const double sign = rng_.uniform() < 0.5 ? -1.0 : 1.0;
      p[i][i - 1] += sign * config_.simplex_scale;
      p[i] = clamp(std::move(p[i]));
      y[i] = evaluate(p[i]).energy;
    }
    std::vector<double> psum(dim_, 0.0);
    auto recompute_psum = [&] {
      std::fill(psum.begin(), psum.end(), 0.0);
      for (const auto& v : p) {
        for (std::size_t j = 0; j < dim_; ++j) psum[j] += v[j];
      }
    };
    recompute_psum();

    long iter = static_cast<long>(budget);
    std::size_t ihi = 0;
    double yhi = 0.0;

    // Extrapolates through the face opposite the high vertex.
    auto amotsa = [&](double fac) {
      const double fac1 = (1.0 - fac) / static_cast<double>(dim_);
      const double fac2 = fac1 - fac;
      auto ptry = ParameterVector::zeros(dim_);
      for (std::size_t j = 0; j < dim_; ++j) ptry[j] = psum[j] * fac1 - p[ihi][j] * fac2;
      ptry = clamp(std::move(ptry));
      const double ytry = evaluate(ptry).energy;
      const double yflu = ytry - thermal(temperature);
      ++attempts_;
      if (yflu < yhi) {
        ++accepted_;
        y[ihi] = ytry;
        yhi = yflu;
        for (std::size_t j = 0; j < dim_; ++j) psum[j] += ptry[j] - p[ihi][j];
        p[ihi] = std::move(ptry);
      }
      return yflu;
    };

    while (true) {
      std::size_t ilo = 0;
      ihi = 1;
      double ylo = y[0] + thermal(temperature);
      double ynhi = ylo;
      yhi = y[1] + thermal(temperature);
      if (ylo > yhi) {
        ihi = 0;
        ilo = 1;
        ynhi = yhi;
        yhi = ylo;
        ylo = ynhi;
      }
      for (std::size_t i = 2; i < mpts; ++i) {
        const double yt = y[i] + thermal(temperature);
        if (yt <= ylo) {
          ilo = i;
          ylo = yt;
        }
        if (yt > yhi) {
          ynhi = yhi;
          ihi = i;
          yhi = yt;
        } else if (yt > ynhi) {
          ynhi = yt;
        }
      }
      const double denom = std::abs(yhi) + std::abs(ylo);
      const double rtol = denom > 0.0 ? 2.0 * std::abs(yhi - ylo) / denom : 0.0;
      // Collapsed simplex on a plateau: nothing more to learn at this temperature.
      if (iter < 0 || rtol < 1e-12) return;
      iter -= 2;
      double ytry = amotsa(-1.0);
      if (ytry <= ylo) {
        amotsa(2.0);
      } else if (ytry >= ynhi) {
        const double ysave = yhi;
        ytry = amotsa(0.5);
        if (ytry >= ysave) {
          for (std::size_t i = 0; i < mpts; ++i) {
            if (i == ilo) continue;
            for (std::size_t j = 0; j < dim_; ++j) p[i][j] = 0.5 * (p[i][j] + p[ilo][j]);
            y[i] = evaluate(p[i]).energy;
          }
          iter -= static_cast<long>(dim_);
          recompute_psum();
        }
      } else {
        ++iter;
      }
    }
  }

  const Corpus& corpus_;
  const AnnealConfig& config_;
  ExecPolicy exec_;
  Rng rng_;
  std::size_t dim_;
  bool have_best_ = false;
  Point best_;
  ParameterVector best_theta_;
  std::size_t evaluations_ = 0;
  std::size_t attempts_ = 0;
  std::size_t accepted_ = 0;
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

AnnealResult maximize_correct(const Corpus& corpus, const ParameterVector& theta0, const AnnealConfig& config,
                              const ExecPolicy& exec) {
  config.validate();
  if (theta0.size() != corpus.num_features()) throw DataError("initial parameters do not match the catalog");
  if (!theta0.all_finite()) throw NumericalError("initial parameters are not finite");
  for (double v : theta0.theta) {
    if (std::abs(v) > config.parameter_box) throw ConfigError("initial parameters lie outside the parameter box");
  }
  return Annealer(corpus, config, exec).run(theta0);
}

AnnealResult maximize_correct_chains(const Corpus& corpus, const ParameterVector& theta0,
                                     const AnnealConfig& config, std::size_t chains, int jobs) {
  if (chains < 1) throw ConfigError("at least one annealing chain is required");
  config.validate();
  std::vector<AnnealResult> results(chains);
  std::vector<std::exception_ptr> errors(chains);
  const auto n = static_cast<std::ptrdiff_t>(chains);
#pragma omp parallel for num_threads(jobs < 1 ? 1 : jobs) schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    AnnealConfig chain_config = config;
    chain_config.seed = c == 0 ? config.seed : splitmix(config.seed + static_cast<std::uint64_t>(c));
    try {
      results[c] = maximize_correct(corpus, theta0, chain_config);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < chains; ++c) {
    const Point a{results[c].best_C, results[c].best_log_pl, 0.0};
    const Point b{results[best].best_C, results[best].best_log_pl, 0.0};
    if (better(a, b)) best = c;
  }
  return std::move(results[best]);
}

}  // namespace parserank
