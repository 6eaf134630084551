#pragma once

// Test-only builders and brute-force oracles. Nothing here calls into the
// library's numerical code paths: probabilities are computed from dense
// vectors with plain exp(), derivatives by central differences, maxima by
// exhaustive grids.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "parserank/corpus.hpp"
#include "parserank/loglinear.hpp"
#include "parserank/rng.hpp"
#include "parserank/synthlab.hpp"

namespace testsupport {

using parserank::Corpus;
using parserank::FeatureCatalog;
using parserank::FeatureVector;
using parserank::ParameterVector;
using parserank::Sentence;

using Dense = std::vector<double>;
using DenseSentence = std::pair<std::vector<Dense>, std::size_t>;  // parses, correct

inline FeatureCatalog numbered_catalog(std::size_t m) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < m; ++j) names.push_back("f" + std::to_string(j));
  return FeatureCatalog(std::move(names));
}

inline Corpus make_corpus(std::size_t m, const std::vector<DenseSentence>& sentences) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Sentence s;
    s.id = "s" + std::to_string(i);
    for (const auto& p : sentences[i].first) s.parses.push_back(FeatureVector::from_dense(p));
    s.correct = sentences[i].second;
    out.push_back(std::move(s));
  }
  return Corpus(numbered_catalog(m), std::move(out));
}

// Random corpus with integer feature values in [0, max_value].
inline Corpus random_corpus(parserank::Rng& rng, std::size_t m, std::size_t n, std::size_t max_parses,
                            int max_value = 5, double density = 0.5) {
  std::vector<DenseSentence> sentences;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = 1 + rng.below(max_parses);
    std::vector<Dense> parses;
    for (std::size_t p = 0; p < k; ++p) {
      Dense f(m, 0.0);
      for (auto& v : f) {
        if (rng.uniform() < density) v = static_cast<double>(rng.below(static_cast<std::uint64_t>(max_value) + 1));
      }
      parses.push_back(f);
    }
    sentences.emplace_back(parses, rng.below(k));
  }
  return make_corpus(m, sentences);
}

inline ParameterVector random_theta(parserank::Rng& rng, std::size_t m, double lo, double hi) {
  Dense t(m);
  for (auto& v : t) v = rng.uniform(lo, hi);
  return ParameterVector(t);
}

inline double dense_dot(const Dense& a, const Dense& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

// Conditional probabilities by direct exponentiation (no max shift).
inline Dense naive_cond_probs(const ParameterVector& theta, const Sentence& s) {
  const std::size_t m = theta.size();
  Dense w;
  double z = 0.0;
  for (const auto& p : s.parses) {
    w.push_back(std::exp(dense_dot(theta.theta, p.to_dense(m))));
    z += w.back();
  }
  for (auto& v : w) v /= z;
  return w;
}

inline double naive_log_pl(const ParameterVector& theta, const Corpus& c) {
  double s = 0.0;
  for (const auto& sent : c.sentences()) s += std::log(naive_cond_probs(theta, sent)[sent.correct]);
  return s;
}

inline double naive_penalized(const ParameterVector& theta, const Corpus& c, const parserank::RegularizerSpec& reg) {
  double v = naive_log_pl(theta, c);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (reg.active[j]) v -= theta[j] * theta[j] / (2.0 * reg.sigmas[j] * reg.sigmas[j]);
  }
  return v;
}

inline Dense central_differences(const std::function<double(const ParameterVector&)>& f, const ParameterVector& x,
                                 double h = 1e-5) {
  Dense g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    ParameterVector up = x, dn = x;
    up[j] += h;
    dn[j] -= h;
    g[j] = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

// Fourth-order central differences, for checks at tight tolerances on
// objectives with large magnitudes.
inline Dense central_differences_5pt(const std::function<double(const ParameterVector&)>& f,
                                     const ParameterVector& x, double h = 1e-3) {
  Dense g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    ParameterVector p1 = x, p2 = x, m1 = x, m2 = x;
    p1[j] += h;
    p2[j] += 2 * h;
    m1[j] -= h;
    m2[j] -= 2 * h;
    g[j] = (8.0 * (f(p1) - f(m1)) - (f(p2) - f(m2))) / (12.0 * h);
  }
  return g;
}

// |a - b| / max(1, |b|): relative error with an absolute floor for
// components that are (near) zero.
inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Exhaustive maximizer of f over an axis-aligned 2-D grid.
struct GridMax {
  double x = 0.0, y = 0.0, value = -INFINITY;
};

inline GridMax grid_maximize_2d(const std::function<double(double, double)>& f, double lo, double hi, double step) {
  GridMax best;
  const auto count = static_cast<long>(std::llround((hi - lo) / step));
  for (long a = 0; a <= count; ++a) {
    const double x = lo + step * static_cast<double>(a);
    for (long b = 0; b <= count; ++b) {
      const double y = lo + step * static_cast<double>(b);
      const double v = f(x, y);
      if (v > best.value) best = {x, y, v};
    }
  }
  return best;
}

// C by definition: 1/l when the correct parse is among the l top scorers.
inline double naive_C(const ParameterVector& theta, const Corpus& c, double tol = 1e-9) {
  double total = 0.0;
  for (const auto& s : c.sentences()) {
    Dense sc;
    for (const auto& p : s.parses) sc.push_back(dense_dot(theta.theta, p.to_dense(theta.size())));
    const double top = *std::max_element(sc.begin(), sc.end());
    const double band = tol * std::max(1.0, std::abs(top));
    std::size_t l = 0;
    for (double v : sc) l += (top - v <= band);
    if (top - sc[s.correct] <= band) total += 1.0 / static_cast<double>(l);
  }
  return total;
}

// Random universe: `yields` labels, each with 2..max_members analyses,
// integer features in [0, max_value].
inline parserank::FiniteUniverse random_universe(parserank::Rng& rng, std::size_t m, std::size_t yields,
                                                 std::size_t max_members, int max_value = 3) {
  std::vector<parserank::FiniteUniverse::Analysis> analyses;
  for (std::size_t y = 0; y < yields; ++y) {
    const std::size_t k = 2 + rng.below(max_members - 1);
    for (std::size_t a = 0; a < k; ++a) {
      Dense f(m);
      for (auto& v : f) v = static_cast<double>(rng.below(static_cast<std::uint64_t>(max_value) + 1));
      analyses.push_back({"y" + std::to_string(y), FeatureVector::from_dense(f)});
    }
  }
  return parserank::FiniteUniverse(numbered_catalog(m), std::move(analyses));
}

}  // namespace testsupport

namespace testsupport {

// Bounding box for the maximizer of log PL - sum theta_j^2/(2 sigma_j^2):
// at the optimum the penalty cannot exceed -log PL(0), so
// |theta_j| <= sigma_j * sqrt(2 * -log PL(0)).
inline double penalized_box(const Corpus& c, const parserank::RegularizerSpec& reg) {
  const double budget = -naive_log_pl(ParameterVector::zeros(c.num_features()), c);
  double box = 0.0;
  for (std::size_t j = 0; j < reg.size(); ++j) {
    if (reg.active[j]) box = std::max(box, reg.sigmas[j] * std::sqrt(2.0 * budget));
  }
  return box;
}

// Exhaustive two-level grid: step `coarse` over [-box, box]^2, then step
// `fine` over a window of +-window around the coarse winner. Fails loudly
// (value = NaN) if the fine winner sits on the window edge.
inline GridMax two_level_grid(const std::function<double(double, double)>& f, double box, double coarse,
                              double fine, double window) {
  const GridMax c = grid_maximize_2d(f, -box, box, coarse);
  GridMax best;
  const auto count = static_cast<long>(std::llround(2 * window / fine));
  long bi = 0, bj = 0;
  for (long a = 0; a <= count; ++a) {
    const double x = c.x - window + fine * static_cast<double>(a);
    for (long b = 0; b <= count; ++b) {
      const double y = c.y - window + fine * static_cast<double>(b);
      const double v = f(x, y);
      if (v > best.value) {
        best = {x, y, v};
        bi = a;
        bj = b;
      }
    }
  }
  if (bi == 0 || bj == 0 || bi == count || bj == count) best.value = NAN;
  return best;
}

// Feature 0 marks the correct parse; features 1 and 2 are noise.
inline Corpus separable_corpus(parserank::Rng& rng, std::size_t n) {
  std::vector<DenseSentence> s;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = 1 + rng.below(5);
    std::vector<Dense> parses(k, Dense{0, 0, 0});
    const std::size_t correct = rng.below(k);
    parses[correct][0] = 1;
    for (auto& p : parses) {
      p[1] = static_cast<double>(rng.below(3));
      p[2] = static_cast<double>(rng.below(2));
    }
    s.emplace_back(parses, correct);
  }
  return make_corpus(3, s);
}

// Max of C over a points x points grid on [-box, box]^2.
inline double grid_max_C(const Corpus& c, double box, int points) {
  double best = -1;
  for (int a = 0; a < points; ++a) {
    for (int b = 0; b < points; ++b) {
      const double x = -box + 2 * box * a / (points - 1), y = -box + 2 * box * b / (points - 1);
      best = std::max(best, naive_C(ParameterVector({x, y}), c));
    }
  }
  return best;
}

// C depends only on the direction of theta (and is special at the origin),
// so a fine angular sweep is an independent global-max oracle in 2-D.
inline double angular_max_C(const Corpus& c) {
  double best = naive_C(ParameterVector::zeros(2), c);
  constexpr int kSteps = 200000;
  for (int i = 0; i < kSteps; ++i) {
    const double a = 2 * M_PI * i / kSteps;
    best = std::max(best, naive_C(ParameterVector({std::cos(a), std::sin(a)}), c));
  }
  return best;
}

// Six features: f0, f1 pseudo-constant; f2 pseudo-maximal; f3 pseudo-minimal;
// f4, f5 ordinary.
inline Corpus six_feature_corpus() {
  return make_corpus(6, {
                            {{{1, 2, 3, 0, 1, 0}, {1, 2, 1, 1, 0, 1}, {1, 2, 0, 2, 2, 0}}, 0},
                            {{{1, 5, 1, 1, 0, 2}, {1, 5, 2, 0, 1, 0}}, 1},
                            {{{1, 0, 2, 1, 1, 1}, {1, 0, 2, 1, 0, 2}, {1, 0, 0, 3, 2, 3}}, 1},
                            {{{1, 4, 0, 0, 0, 0}}, 0},
                        });
}

}  // namespace testsupport
