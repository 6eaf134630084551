#include "parserank/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "parserank/errors.hpp"
#include "parserank/kernels.hpp"
#include "parserank/rng.hpp"

namespace parserank {

using nlohmann::json;
using nlohmann::ordered_json;

FiniteUniverse::FiniteUniverse(FeatureCatalog catalog, std::vector<Analysis> analyses)
    : catalog_(std::move(catalog)), analyses_(std::move(analyses)) {
  if (analyses_.empty()) throw DataError("universe has no analyses");
  std::unordered_map<std::string, std::size_t> yield_index;
  for (std::size_t i = 0; i < analyses_.size(); ++i) {
    const auto& a = analyses_[i];
    if (a.features.index_bound() > catalog_.size()) throw DataError("analysis feature index out of range");
    auto [it, fresh] = yield_index.emplace(a.yield, yields_.size());
    if (fresh) {
      yields_.push_back(a.yield);
      members_.emplace_back();
    }
    members_[it->second].push_back(i);
  }
}

namespace {

void check_cap(const FiniteUniverse& u, std::size_t cap) {
  if (u.size() > cap) {
    throw ConfigError("universe has " + std::to_string(u.size()) + " analyses, above the enumeration cap of " +
                      std::to_string(cap));
  }
}

void check_dims(const ParameterVector& theta, const FiniteUniverse& u) {
  if (theta.size() != u.catalog().size()) throw DataError("parameter vector does not match the universe catalog");
}

std::vector<double> scores_of(const ParameterVector& theta, const FiniteUniverse& u) {
  std::vector<double> s(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) s[i] = kernels::detail::sparse_dot(theta.theta, u.analyses()[i].features);
  return s;
}

double log_sum_exp(const std::vector<double>& v) {
  const double top = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - top);
  return top + std::log(sum);
}

double log_sum_exp_over(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) top = std::max(top, v[i]);
  double sum = 0.0;
  for (std::size_t i : idx) sum += std::exp(v[i] - top);
  return top + std::log(sum);
}

using Key = std::vector<std::pair<FeatureIndex, double>>;

Key key_of(const FeatureVector& f) {
  Key k;
  for (const auto& e : f.entries()) k.emplace_back(e.index, e.value);
  return k;
}

void check_corpus(const Corpus& corpus, const FiniteUniverse& u) {
  if (!(corpus.catalog() == u.catalog())) throw DataError("corpus and universe catalogs differ");
  std::set<Key> known;
  for (const auto& a : u.analyses()) known.insert(key_of(a.features));
  for (const auto& s : corpus.sentences()) {
    if (!known.contains(key_of(s.correct_parse()))) {
      throw DataError("sentence '" + s.id + "': correct analysis is not in the universe");
    }
  }
}

}  // namespace

double partition_function(const ParameterVector& theta, const FiniteUniverse& universe, std::size_t cap) {
  check_cap(universe, cap);
  check_dims(theta, universe);
  return log_sum_exp(scores_of(theta, universe));
}

double full_log_likelihood(const ParameterVector& theta, const Corpus& corpus, const FiniteUniverse& universe,
                           std::size_t cap) {
  check_cap(universe, cap);
  check_dims(theta, universe);
  check_corpus(corpus, universe);
  const auto totals = aggregate_feature_totals(corpus);
  double value = 0.0;
  for (std::size_t j = 0; j < totals.size(); ++j) value += theta[j] * totals[j];
  return value - static_cast<double>(corpus.size()) * partition_function(theta, universe, cap);
}

std::vector<double> full_likelihood_gradient(const ParameterVector& theta, const Corpus& corpus,
                                             const FiniteUniverse& universe, std::size_t cap) {
  check_cap(universe, cap);
  check_dims(theta, universe);
  check_corpus(corpus, universe);
  const auto scores = scores_of(theta, universe);
  const double log_z = log_sum_exp(scores);
  std::vector<double> expectation(theta.size(), 0.0);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const double p = std::exp(scores[i] - log_z);
    for (const auto& e : universe.analyses()[i].features.entries()) expectation[e.index] += p * e.value;
  }
  auto grad = aggregate_feature_totals(corpus);
  const double n = static_cast<double>(corpus.size());
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= n * expectation[j];
  return grad;
}

double kl_divergence(const ParameterVector& p_theta, const ParameterVector& q_theta,
                     const FiniteUniverse& universe, std::size_t cap) {
  check_cap(universe, cap);
  check_dims(p_theta, universe);
  check_dims(q_theta, universe);
  const auto sp = scores_of(p_theta, universe);
  const auto sq = scores_of(q_theta, universe);
  const double zp = log_sum_exp(sp), zq = log_sum_exp(sq);
  double kl = 0.0;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    const double lp = sp[i] - zp, lq = sq[i] - zq;
    kl += std::exp(lp) * (lp - lq);
  }
  return std::max(0.0, kl);  // rounding can leave a tiny negative residue
}

double expected_conditional_kl(const ParameterVector& theta_star, const ParameterVector& theta_hat,
                               const FiniteUniverse& universe, std::size_t cap) {
  check_cap(universe, cap);
  check_dims(theta_star, universe);
  check_dims(theta_hat, universe);
  const auto ss = scores_of(theta_star, universe);
  const auto sh = scores_of(theta_hat, universe);
  const double z_star = log_sum_exp(ss);
  double total = 0.0;
  for (std::size_t y = 0; y < universe.yields().size(); ++y) {
    const auto& idx = universe.members(y);
    const double zs_y = log_sum_exp_over(ss, idx);
    const double zh_y = log_sum_exp_over(sh, idx);
    double kl = 0.0;
    for (std::size_t i : idx) {
      const double lp = ss[i] - zs_y, lq = sh[i] - zh_y;
      kl += std::exp(lp) * (lp - lq);
    }
    total += std::exp(zs_y - z_star) * std::max(0.0, kl);
  }
  return total;
}

std::vector<double> yield_conditional_probs(const ParameterVector& theta, const FiniteUniverse& universe,
                                            std::size_t y, std::size_t cap) {
  check_cap(universe, cap);
  check_dims(theta, universe);
  const auto scores = scores_of(theta, universe);
  const double log_z = log_sum_exp(scores);
  const auto& idx = universe.members(y);
  // Joint probabilities of the class members, then their share of the class mass.
  std::vector<double> joint_log;
  for (std::size_t i : idx) joint_log.push_back(scores[i] - log_z);
  const double log_class = log_sum_exp(joint_log);
  std::vector<double> out;
  for (double lp : joint_log) out.push_back(std::exp(lp - log_class));
  return out;
}

namespace {

std::size_t draw_categorical(Rng& rng, const std::vector<double>& weights, double total) {
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  // Rounding left u >= 0: pick the last category with positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace

Corpus generate_corpus(const GroundTruth& truth, std::size_t n, std::uint64_t seed, const GenerateOptions& options) {
  if (n < 1) throw ConfigError("generated corpus size must be at least 1");
  const auto& u = truth.universe;
  check_dims(truth.theta_star, u);
  const std::size_t n_yields = u.yields().size();
  const auto scores = scores_of(truth.theta_star, u);

  std::vector<std::vector<double>> cond(n_yields);
  std::vector<double> class_log_mass(n_yields);
  for (std::size_t y = 0; y < n_yields; ++y) {
    const auto& idx = u.members(y);
    class_log_mass[y] = log_sum_exp_over(scores, idx);
    for (std::size_t i : idx) cond[y].push_back(std::exp(scores[i] - class_log_mass[y]));
  }

  std::vector<double> yield_weights;
  switch (options.sampling) {
    case YieldSampling::uniform:
      yield_weights.assign(n_yields, 1.0);
      break;
    case YieldSampling::weighted:
      if (options.yield_weights.size() != n_yields) throw ConfigError("need one weight per yield label");
      for (double w : options.yield_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("yield weights must be finite and non-negative");
      }
      yield_weights = options.yield_weights;
      break;
    case YieldSampling::joint: {
      const double log_z = log_sum_exp(scores);
      for (double lm : class_log_mass) yield_weights.push_back(std::exp(lm - log_z));
      break;
    }
  }
  double weight_total = 0.0;
  for (double w : yield_weights) weight_total += w;
  if (!(weight_total > 0.0)) throw ConfigError("yield weights sum to zero");

  const int width = std::max<int>(5, static_cast<int>(std::to_string(n - 1).size()));
  std::vector<Sentence> sentences;
  sentences.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = draw_categorical(rng, yield_weights, weight_total);
    Sentence s;
    std::ostringstream id;
    id << 's' << std::setw(width) << std::setfill('0') << i;
    s.id = id.str();
    for (std::size_t a : u.members(y)) s.parses.push_back(u.analyses()[a].features);
    s.correct = draw_categorical(rng, cond[y], 1.0);
    sentences.push_back(std::move(s));
  }
  return Corpus(u.catalog(), std::move(sentences));
}

FiniteUniverse read_universe(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed universe file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array() || !doc.contains("analyses") ||
      !doc["analyses"].is_array()) {
    throw DataError("universe file needs \"features\" and \"analyses\" arrays");
  }
  std::vector<std::string> names;
  for (const auto& n : doc["features"]) {
    if (!n.is_string()) throw DataError("feature names must be strings");
    names.push_back(n.get<std::string>());
  }
  FeatureCatalog catalog(std::move(names));
  std::vector<FiniteUniverse::Analysis> analyses;
  std::size_t pos = 0;
  for (const auto& a : doc["analyses"]) {
    const std::string where = "analysis " + std::to_string(pos++);
    if (!a.is_object() || !a.contains("yield") || !a["yield"].is_string()) {
      throw DataError(where + ": needs a string \"yield\"");
    }
    std::vector<FeatureVector::Entry> entries;
    if (a.contains("features")) {
      if (!a["features"].is_object()) throw DataError(where + ": \"features\" must be an object");
      for (auto it = a["features"].begin(); it != a["features"].end(); ++it) {
        const FeatureIndex j = catalog.find(it.key());
        if (j == catalog.size()) throw DataError(where + ": unknown feature '" + it.key() + "'");
        if (!it.value().is_number()) throw DataError(where + ": value of '" + it.key() + "' is not a number");
        entries.push_back({j, it.value().get<double>()});
      }
    }
    analyses.push_back({a["yield"].get<std::string>(), FeatureVector(std::move(entries))});
  }
  return FiniteUniverse(std::move(catalog), std::move(analyses));
}

FiniteUniverse load_universe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open universe file '" + path.string() + "'");
  return read_universe(in);
}

void write_universe(std::ostream& out, const FiniteUniverse& universe) {
  ordered_json doc;
  doc["features"] = universe.catalog().names();
  doc["analyses"] = ordered_json::array();
  for (const auto& a : universe.analyses()) {
    ordered_json feats = ordered_json::object();
    for (const auto& e : a.features.entries()) feats[universe.catalog().name(e.index)] = e.value;
    doc["analyses"].push_back(ordered_json{{"yield", a.yield}, {"features", feats}});
  }
  out << doc.dump(2) << '\n';
}

}  // namespace parserank
