#include "superk/model_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "superk/error.hpp"

namespace superk {

namespace {

using nlohmann::json;

constexpr double kOffsetRelTol = 1e-12;

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields{"format_version", "m",      "n_classes", "label_names",
                                            "generators",     "labels", "offsets"};
  return fields;
}

const json& require(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ModelFormatError(std::string("model file: missing field '") + key + "'");
  return *it;
}

template <class T>
T get_as(const json& value, const char* what) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ModelFormatError(std::string("model file: field '") + what + "' has the wrong type");
  }
}

}  // namespace

std::string model_to_json(const Model& model) {
  model.validate();
  const GeneratorSet set =
      model.generators.has_offsets() ? model.generators : precompute_offsets(model.generators);
  json doc;
  doc["format_version"] = Model::kFormatVersion;
  doc["m"] = set.dims();
  doc["n_classes"] = model.n_classes;
  doc["label_names"] = model.label_names;
  json points = json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto p = set.point(i);
    points.push_back(std::vector<double>(p.begin(), p.end()));
  }
  doc["generators"] = std::move(points);
  doc["labels"] = model.labels;
  doc["offsets"] = std::vector<double>(set.offsets().begin(), set.offsets().end());
  return doc.dump(1) + "\n";
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model to '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Model model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFormatError(std::string("model file: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ModelFormatError("model file: top level is not an object");
  for (const auto& [key, _] : doc.items()) {
    if (!known_fields().contains(key)) {
      throw ModelFormatError("model file: unknown field '" + key + "'");
    }
  }

  const int version = get_as<int>(require(doc, "format_version"), "format_version");
  if (version != Model::kFormatVersion) {
    throw ModelFormatError("model file: unsupported format_version " + std::to_string(version) +
                           " (this build reads version " + std::to_string(Model::kFormatVersion) +
                           ")");
  }
  const auto m = get_as<std::size_t>(require(doc, "m"), "m");
  const int n_classes = get_as<int>(require(doc, "n_classes"), "n_classes");
  auto rows = get_as<std::vector<std::vector<double>>>(require(doc, "generators"), "generators");
  auto labels = get_as<std::vector<int>>(require(doc, "labels"), "labels");
  auto offsets = get_as<std::vector<double>>(require(doc, "offsets"), "offsets");
  std::vector<std::string> label_names;
  if (const auto it = doc.find("label_names"); it != doc.end() && !it->is_null()) {
    label_names = get_as<std::vector<std::string>>(*it, "label_names");
  }

  if (m < 1) throw ModelFormatError("model file: m must be at least 1");
  if (rows.empty()) throw ModelFormatError("model file: no generators");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m) {
      throw ModelFormatError("model file: generator " + std::to_string(i) + " has " +
                             std::to_string(rows[i].size()) + " values, expected m = " +
                             std::to_string(m));
    }
  }
  if (labels.size() != rows.size() || offsets.size() != rows.size()) {
    throw ModelFormatError("model file: generators, labels and offsets differ in length");
  }

  Model model;
  model.generators = precompute_offsets(GeneratorSet(Matrix::from_rows(rows)));
  const auto recomputed = model.generators.offsets();
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const double want = recomputed[i];
    if (!(std::abs(offsets[i] - want) <= kOffsetRelTol * std::abs(want))) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "model file is corrupt: offset " << i << " is " << offsets[i] << ", generator implies "
          << want;
      throw ModelFormatError(msg.str());
    }
  }
  model.labels = std::move(labels);
  model.n_classes = n_classes;
  model.format_version = version;
  model.label_names = std::move(label_names);
  try {
    model.validate();
  } catch (const Error& e) {
    throw ModelFormatError(std::string("model file: ") + e.what());
  }
  return model;
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace superk
