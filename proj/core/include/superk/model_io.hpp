#pragma once

#include <filesystem>
#include <string>

#include "superk/tessellation.hpp"

namespace superk {

/// Writes `model` as a single JSON document:
///   {"format_version", "m", "n_classes", "label_names", "generators",
///    "labels", "offsets"}
/// Doubles use the shortest decimal form that round-trips exactly.
void save_model(const Model& model, const std::filesystem::path& path);

/// Serialized form used by save_model.
std::string model_to_json(const Model& model);

/// Reads and validates a model file. Throws ModelFormatError on a malformed
/// document, unknown fields, an unsupported format_version, inconsistent
/// dimensions, or stored offsets that disagree with the generators.
Model load_model(const std::filesystem::path& path);

Model model_from_json(const std::string& text);

}  // namespace superk
