#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "parserank/corpus.hpp"
#include "parserank/loglinear.hpp"

namespace parserank {

// Parameters as stored on disk:
//   {"theta": {"<feature>": <number>, ...}, "frozen": ["<feature>", ...]}
// Features missing from "theta" are zero.
struct ParameterFile {
  ParameterVector params;
  std::vector<bool> frozen;
};

void write_parameters(std::ostream& out, const FeatureCatalog& catalog, const ParameterVector& params,
                      const std::vector<bool>& frozen);
void save_parameters(const std::filesystem::path& path, const FeatureCatalog& catalog,
                     const ParameterVector& params, const std::vector<bool>& frozen);

// Aligns the stored values with `catalog`; names the catalog does not know
// are a catalog mismatch.
ParameterFile read_parameters(std::istream& in, const FeatureCatalog& catalog);
ParameterFile load_parameters(const std::filesystem::path& path, const FeatureCatalog& catalog);

}  // namespace parserank
