#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "parserank/corpus.hpp"

namespace parserank {

// Pathologies of a feature relative to a training corpus.
//
//  pseudo-constant  every sentence's parses share one value of the feature,
//                   so it carries no information about which parse is correct.
//  pseudo-maximal   on every sentence the correct parse's value is >= that of
//                   every candidate; unregularized PL then pushes theta_j to +inf.
//  pseudo-minimal   the mirror image; theta_j goes to -inf.
//
// Pseudo-constant features are never reported as maximal or minimal. A
// non-constant feature tied on some sentences can be both maximal and
// minimal; it is then counted in both rows.
struct FeatureDiagnosis {
  FeatureIndex feature = 0;
  bool pseudo_constant = false;
  bool pseudo_maximal = false;
  bool pseudo_minimal = false;
  // First sentence on which the feature varies across parses.
  std::optional<std::string> varies_in;
  // First sentence where some candidate exceeds the correct value (refutes maximal).
  std::optional<std::string> exceeds_correct_in;
  // First sentence where some candidate falls below the correct value (refutes minimal).
  std::optional<std::string> below_correct_in;

  bool healthy() const { return !pseudo_constant && !pseudo_maximal && !pseudo_minimal; }
};

struct DiagnosticsReport {
  std::size_t n_features = 0;
  // Features whose name starts with "rule:" (grammar-production features).
  std::size_t n_rule_features = 0;
  std::size_t n_pseudo_constant = 0;
  std::size_t n_pseudo_maximal = 0;
  std::size_t n_pseudo_minimal = 0;
  std::vector<FeatureDiagnosis> features;
};

inline constexpr const char* kRuleFeaturePrefix = "rule:";

std::set<FeatureIndex> pseudo_constant_features(const Corpus& corpus);
std::set<FeatureIndex> pseudo_maximal_features(const Corpus& corpus);
std::set<FeatureIndex> pseudo_minimal_features(const Corpus& corpus);

DiagnosticsReport diagnose(const Corpus& corpus, int jobs = 1);

}  // namespace parserank
