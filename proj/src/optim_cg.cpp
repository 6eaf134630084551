#include "parserank/optim_cg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "parserank/diagnostics.hpp"
#include "parserank/errors.hpp"

namespace parserank {

void CgConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(objective_rel_tol > 0.0) || !(gradient_norm_tol > 0.0) || !(line_search_tol > 0.0)) {
    throw ConfigError("CG tolerances must be positive");
  }
}

std::string to_string(CgTermination reason) {
  switch (reason) {
    case CgTermination::gradient_tolerance: return "gradient_tolerance";
    case CgTermination::objective_tolerance: return "objective_tolerance";
    case CgTermination::max_iterations: return "max_iterations";
    case CgTermination::line_search_stalled: return "line_search_stalled";
  }
  return "unknown";
}

namespace {

constexpr double kGold = 1.618033988749895;
constexpr double kCGold = 0.3819660112501051;
constexpr int kMaxContractions = 80;
constexpr int kMaxExpansions = 60;
constexpr int kMaxBrentIterations = 100;
// Cap on how far one line search may move any coordinate.
constexpr double kMaxMove = 1e8;

double max_norm(const std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n = std::max(n, std::abs(x));
  return n;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string describe(const ParameterVector& theta) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t j = 0; j < theta.size(); ++j) os << (j ? ", " : "") << theta[j];
  os << ']';
  return os.str();
}

class Evaluator {
 public:
  Evaluator(const GradientObjective& f, std::size_t& counter) : f_(f), counter_(counter) {}

  ObjectiveReport operator()(const ParameterVector& theta) const {
    ++counter_;
    ObjectiveReport r = f_(theta);
    bool finite = std::isfinite(r.value) && r.gradient.size() == theta.size();
    for (double g : r.gradient) finite = finite && std::isfinite(g);
    if (!finite) throw NumericalError("non-finite objective or gradient at theta = " + describe(theta));
    return r;
  }

 private:
  const GradientObjective& f_;
  std::size_t& counter_;
};

struct LineResult {
  bool improved = false;
  double alpha = 0.0;
  ParameterVector theta;
  ObjectiveReport report;
};

// Maximizes phi(alpha) = f(theta + alpha * dir) over alpha > 0.
class LineSearch {
 public:
  LineSearch(const Evaluator& eval, const ParameterVector& origin, double f0, const std::vector<double>& dir,
             double tol)
      : eval_(eval), origin_(origin), dir_(dir), tol_(tol), f0_(f0) {}

  LineResult run(double alpha0) {
    const double dnorm = max_norm(dir_);
    const double alpha_cap = kMaxMove / dnorm;
    alpha0 = std::min(alpha0, alpha_cap);

    // Bracket: find 0 < b < c with phi(b) > phi(0) and phi(b) >= phi(c).
    double a = 0.0, b = alpha0;
    double fb = phi(b);
    int tries = 0;
    while (!(fb > f0_) && tries++ < kMaxContractions) {
      b *= kCGold;
      fb = phi(b);
    }
    if (!(fb > f0_)) return std::move(best_);

    double c = b + kGold * (b - a);
    double fc = phi(std::min(c, alpha_cap));
    c = std::min(c, alpha_cap);
    for (int k = 0; fc > fb && k < kMaxExpansions && c < alpha_cap; ++k) {
      a = b;
      b = c;
      fb = fc;
      c = std::min(b + kGold * (b - a), alpha_cap);
      fc = phi(c);
    }
    if (fc > fb) return std::move(best_);  // unbounded along the ray; take the far point

    brent(a, b, c, fb);
    return std::move(best_);
  }

 private:
  double phi(double alpha) {
    ParameterVector theta = origin_;
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += alpha * dir_[j];
    ObjectiveReport r = eval_(theta);
    const double v = r.value;
    if (v > (best_.improved ? best_.report.value : f0_)) {
      best_.improved = true;
      best_.alpha = alpha;
      best_.theta = std::move(theta);
      best_.report = std::move(r);
    }
    return v;
  }

  // Brent's method on -phi over [lo, hi] starting from the interior point x.
  void brent(double lo, double x, double hi, double fx_phi) {
    double a = lo, b = hi;
    double w = x, v = x;
    double fx = -fx_phi, fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    const double zeps = 1e-12 * hi;
    for (int iter = 0; iter < kMaxBrentIterations; ++iter) {
      const double xm = 0.5 * (a + b);
      const double tol1 = tol_ * std::abs(x) + zeps;
      const double tol2 = 2.0 * tol1;
      if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) return;
      bool golden = true;
      if (std::abs(e) > tol1) {
        double r = (x - w) * (fx - fv);
        double q = (x - v) * (fx - fw);
        double p = (x - v) * q - (x - w) * r;
        q = 2.0 * (q - r);
        if (q > 0.0) p = -p;
        q = std::abs(q);
        const double etemp = e;
        e = d;
        if (!(std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (a - x) || p >= q * (b - x))) {
          d = p / q;
          const double u = x + d;
          if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
          golden = false;
        }
      }
      if (golden) {
        e = (x >= xm) ? a - x : b - x;
        d = kCGold * e;
      }
      const double u = (std::abs(d) >= tol1) ? x + d : x + std::copysign(tol1, d);
      const double fu = -phi(u);
      if (fu <= fx) {
        if (u >= x) a = x; else b = x;
        v = w; fv = fw;
        w = x; fw = fx;
        x = u; fx = fu;
      } else {
        if (u < x) a = u; else b = u;
        if (fu <= fw || w == x) {
          v = w; fv = fw;
          w = u; fw = fu;
        } else if (fu <= fv || v == x || v == w) {
          v = u; fv = fu;
        }
      }
    }
  }

  const Evaluator& eval_;
  const ParameterVector& origin_;
  const std::vector<double>& dir_;
  double tol_;
  double f0_;
  LineResult best_;
};

}  // namespace

CgResult maximize(const GradientObjective& objective, ParameterVector theta0, const CgConfig& config) {
  config.validate();
  if (!theta0.all_finite()) throw NumericalError("initial parameters are not finite");

  CgResult result;
  const Evaluator eval(objective, result.trace.evaluations);
  const std::size_t restart_period = config.restart_period ? config.restart_period : std::max<std::size_t>(1, theta0.size());

  result.theta = std::move(theta0);
  result.final = eval(result.theta);
  result.trace.initial_objective = result.final.value;
  if (config.record_iterates) result.trace.iterates.push_back(result.theta);

  auto stationary = [&](const ObjectiveReport& r) {
    return max_norm(r.gradient) <= config.gradient_norm_tol * (1.0 + std::abs(r.value));
  };
  if (stationary(result.final)) {
    result.trace.reason = CgTermination::gradient_tolerance;
    return result;
  }

  std::vector<double> dir = result.final.gradient;
  bool dir_is_steepest = true;
  std::size_t since_restart = 0;
  double last_move = 1.0;  // max-norm of the previous accepted move

  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const double f_old = result.final.value;
    LineSearch search(eval, result.theta, f_old, dir, config.line_search_tol);
    LineResult step = search.run(last_move / max_norm(dir));

    if (!step.improved) {
      if (!dir_is_steepest) {
        dir = result.final.gradient;
        dir_is_steepest = true;
        since_restart = 0;
        --it;  // a failed conjugate step does not count as an iteration
        continue;
      }
      // Steepest ascent cannot improve: the gradient is numerical noise
      // unless it is clearly large.
      if (max_norm(result.final.gradient) > 1e3 * config.gradient_norm_tol * (1.0 + std::abs(f_old))) {
        throw NumericalError("line search failed along the gradient at theta = " + describe(result.theta));
      }
      result.trace.reason = CgTermination::line_search_stalled;
      return result;
    }

    double step_len2 = 0.0, move = 0.0;
    for (std::size_t j = 0; j < dir.size(); ++j) {
      const double dj = step.alpha * dir[j];
      step_len2 += dj * dj;
      move = std::max(move, std::abs(dj));
    }
    if (move > 0.0) last_move = move;

    const std::vector<double> g_old = std::move(result.final.gradient);
    result.theta = std::move(step.theta);
    result.final = std::move(step.report);
    if (config.record_iterates) result.trace.iterates.push_back(result.theta);
    result.trace.iterations.push_back(
        CgIteration{result.final.value, max_norm(result.final.gradient), std::sqrt(step_len2), dir_is_steepest});

    if (stationary(result.final)) {
      result.trace.reason = CgTermination::gradient_tolerance;
      return result;
    }
    const double f_new = result.final.value;
    if (2.0 * std::abs(f_new - f_old) <= config.objective_rel_tol * (std::abs(f_new) + std::abs(f_old) + 1e-10)) {
      result.trace.reason = CgTermination::objective_tolerance;
      return result;
    }

    // Polak-Ribiere with the non-negativity safeguard.
    const auto& g = result.final.gradient;
    double num = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) num += g[j] * (g[j] - g_old[j]);
    const double den = dot(g_old, g_old);
    double beta = den > 0.0 ? std::max(0.0, num / den) : 0.0;
    if (++since_restart >= restart_period) {
      beta = 0.0;
      since_restart = 0;
    }
    for (std::size_t j = 0; j < dir.size(); ++j) dir[j] = g[j] + beta * dir[j];
    dir_is_steepest = beta == 0.0;
    if (!dir_is_steepest && dot(dir, g) <= 0.0) {
      dir = g;
      dir_is_steepest = true;
      since_restart = 0;
    }
  }
  result.trace.reason = CgTermination::max_iterations;
  return result;
}

PlTrainResult train_pl(const Corpus& corpus, const CgConfig& config, const PlTrainOptions& options) {
  PlTrainResult out;
  out.regularizer = compute_sigmas(corpus, options.sigma_multiplier);
  if (!options.regularize) {
    for (std::size_t j = 0; j < out.regularizer.size(); ++j) {
      if (out.regularizer.active[j]) out.regularizer.sigmas[j] = std::numeric_limits<double>::infinity();
    }
  }
  const PlObjective objective(corpus, out.regularizer, options.exec);

  CgConfig cfg = config;
  if (cfg.restart_period == 0) cfg.restart_period = std::max<std::size_t>(1, out.regularizer.num_active());
  if (!options.regularize) cfg.record_iterates = true;

  CgResult result = maximize([&](const ParameterVector& t) { return objective(t); },
                             ParameterVector::zeros(corpus.num_features()), cfg);
  out.theta = std::move(result.theta);
  out.trace = std::move(result.trace);

  if (!options.regularize) {
    const auto report = diagnose(corpus, options.exec.jobs);
    for (const auto& d : report.features) {
      if (d.pseudo_maximal || d.pseudo_minimal) {
        out.warnings.push_back("feature '" + corpus.catalog().name(d.feature) + "' is pseudo-" +
                               (d.pseudo_maximal ? "maximal" : "minimal") +
                               "; its unregularized estimate is unbounded");
      }
    }
    for (FeatureIndex j : drifting_parameters(out.trace, 1.0)) {
      out.warnings.push_back("parameter for '" + corpus.catalog().name(j) +
                             "' grew monotonically over every iteration");
    }
    if (!config.record_iterates) out.trace.iterates.clear();
  }
  return out;
}

std::vector<FeatureIndex> drifting_parameters(const CgTrace& trace, double min_magnitude) {
  std::vector<FeatureIndex> out;
  const auto& its = trace.iterates;
  if (its.size() < 3) return out;
  for (FeatureIndex j = 0; j < its.front().size(); ++j) {
    bool up = true, down = true;
    for (std::size_t k = 1; k < its.size(); ++k) {
      up = up && its[k][j] > its[k - 1][j];
      down = down && its[k][j] < its[k - 1][j];
    }
    if ((up || down) && std::abs(its.back()[j]) >= min_magnitude) out.push_back(j);
  }
  return out;
}

}  // namespace parserank
