#include "parserank/params_io.hpp"

#include <fstream>

#include <json.hpp>

#include "parserank/errors.hpp"

namespace parserank {

using nlohmann::ordered_json;

void write_parameters(std::ostream& out, const FeatureCatalog& catalog, const ParameterVector& params,
                      const std::vector<bool>& frozen) {
  if (params.size() != catalog.size()) throw DataError("parameter vector does not match the catalog");
  ordered_json doc;
  doc["theta"] = ordered_json::object();
  doc["frozen"] = ordered_json::array();
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    doc["theta"][catalog.name(j)] = params[j];
    if (j < frozen.size() && frozen[j]) doc["frozen"].push_back(catalog.name(j));
  }
  out << doc.dump(2) << '\n';
}

void save_parameters(const std::filesystem::path& path, const FeatureCatalog& catalog,
                     const ParameterVector& params, const std::vector<bool>& frozen) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write parameter file '" + path.string() + "'");
  write_parameters(out, catalog, params, frozen);
}

ParameterFile read_parameters(std::istream& in, const FeatureCatalog& catalog) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw DataError(std::string("malformed parameter file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("theta") || !doc["theta"].is_object()) {
    throw DataError("parameter file must be an object with a \"theta\" object");
  }
  ParameterFile file{ParameterVector::zeros(catalog.size()), std::vector<bool>(catalog.size(), false)};
  for (auto it = doc["theta"].begin(); it != doc["theta"].end(); ++it) {
    const FeatureIndex j = catalog.find(it.key());
    if (j == catalog.size()) throw DataError("catalog mismatch: parameter for unknown feature '" + it.key() + "'");
    if (!it.value().is_number()) throw DataError("parameter for '" + it.key() + "' is not a number");
    file.params[j] = it.value().get<double>();
  }
  if (doc.contains("frozen")) {
    if (!doc["frozen"].is_array()) throw DataError("\"frozen\" must be an array of feature names");
    for (const auto& name : doc["frozen"]) {
      if (!name.is_string()) throw DataError("\"frozen\" must be an array of feature names");
      const FeatureIndex j = catalog.find(name.get<std::string>());
      if (j == catalog.size()) {
        throw DataError("catalog mismatch: frozen feature '" + name.get<std::string>() + "' is unknown");
      }
      file.frozen[j] = true;
    }
  }
  if (!file.params.all_finite()) throw DataError("parameter file holds non-finite values");
  return file;
}

ParameterFile load_parameters(const std::filesystem::path& path, const FeatureCatalog& catalog) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open parameter file '" + path.string() + "'");
  return read_parameters(in, catalog);
}

}  // namespace parserank
