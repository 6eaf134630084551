#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "parserank/corpus.hpp"
#include "parserank/loglinear.hpp"

namespace parserank {

// A fully enumerated space of analyses. Analyses sharing a yield label form
// that yield's candidate set. All quantities below are exact sums over the
// enumeration, computed in the log domain.
class FiniteUniverse {
 public:
  struct Analysis {
    std::string yield;
    FeatureVector features;
  };

  FiniteUniverse(FeatureCatalog catalog, std::vector<Analysis> analyses);

  const FeatureCatalog& catalog() const { return catalog_; }
  const std::vector<Analysis>& analyses() const { return analyses_; }
  std::size_t size() const { return analyses_.size(); }

  // Distinct yield labels in order of first appearance.
  const std::vector<std::string>& yields() const { return yields_; }
  // Analysis indices with yield yields()[y], in universe order.
  const std::vector<std::size_t>& members(std::size_t y) const { return members_.at(y); }

 private:
  FeatureCatalog catalog_;
  std::vector<Analysis> analyses_;
  std::vector<std::string> yields_;
  std::vector<std::vector<std::size_t>> members_;
};

struct GroundTruth {
  ParameterVector theta_star;
  FiniteUniverse universe;
};

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

// log Z_theta over the whole universe.
double partition_function(const ParameterVector& theta, const FiniteUniverse& universe,
                          std::size_t cap = kDefaultEnumerationCap);

// Full (joint) log likelihood of the corpus's correct parses:
//   sum_j theta_j f_j(corpus) - n log Z_theta.
// Every correct parse must match some analysis of the universe.
double full_log_likelihood(const ParameterVector& theta, const Corpus& corpus, const FiniteUniverse& universe,
                           std::size_t cap = kDefaultEnumerationCap);

// f_j(corpus) - n E_theta[f_j], with the expectation over the universe.
std::vector<double> full_likelihood_gradient(const ParameterVector& theta, const Corpus& corpus,
                                             const FiniteUniverse& universe,
                                             std::size_t cap = kDefaultEnumerationCap);

// KL(P_p || P_q) between the two joint distributions.
double kl_divergence(const ParameterVector& p_theta, const ParameterVector& q_theta,
                     const FiniteUniverse& universe, std::size_t cap = kDefaultEnumerationCap);

// Average over yields, weighted by the yield marginal under theta_star, of
// KL(P*(. | y) || P_hat(. | y)).
double expected_conditional_kl(const ParameterVector& theta_star, const ParameterVector& theta_hat,
                               const FiniteUniverse& universe, std::size_t cap = kDefaultEnumerationCap);

// P_theta(analysis | yield) for the members of yield index y, obtained by
// restricting the joint distribution (exp(score - log Z)) to the yield class.
std::vector<double> yield_conditional_probs(const ParameterVector& theta, const FiniteUniverse& universe,
                                            std::size_t y, std::size_t cap = kDefaultEnumerationCap);

enum class YieldSampling {
  uniform,   // every yield label equally likely
  weighted,  // GenerateOptions::yield_weights
  joint,     // yield marginal under theta_star
};

struct GenerateOptions {
  YieldSampling sampling = YieldSampling::uniform;
  std::vector<double> yield_weights;
};

// Draws n sentences: a yield, then the correct parse from P_theta*(. | yield).
// Each sentence's candidates are all analyses of its yield.
Corpus generate_corpus(const GroundTruth& truth, std::size_t n, std::uint64_t seed,
                       const GenerateOptions& options = {});

// Universe file: {"features": [...], "analyses": [{"yield": "...", "features": {...}}, ...]}
FiniteUniverse read_universe(std::istream& in);
FiniteUniverse load_universe(const std::filesystem::path& path);
void write_universe(std::ostream& out, const FiniteUniverse& universe);

}  // namespace parserank
