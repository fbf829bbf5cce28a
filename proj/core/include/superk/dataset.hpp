#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "superk/matrix.hpp"

namespace superk {

/// Labeled feature matrix. Labels are dense class ids in [0, n_classes).
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;  // empty when the source had no header
  std::vector<std::string> label_names;    // label_names[id] is the source label text
  int n_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dims() const { return features.cols(); }

  /// Instances per class, indexed by class id.
  std::vector<std::size_t> class_counts() const;

  /// Throws DataError when the structural invariants do not hold.
  void validate() const;
};

/// Column selector for the label: a header name or a zero-based index.
/// A negative index counts from the end (-1 is the last column).
using LabelColumn = std::variant<std::string, int>;

/// Parses a --label-col style token: all-digit (or leading '-') strings become
/// indices, anything else is a column name.
LabelColumn parse_label_column(const std::string& token);

struct CsvOptions {
  /// When set, labels are mapped onto these names (in this order) instead of
  /// first-appearance order. Labels not in the list are rejected.
  std::optional<std::vector<std::string>> known_labels;
};

/// Reads a comma-separated file. The first row is treated as a header when any
/// of its cells is non-numeric. Errors name the 1-based file row and the
/// zero-based column.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 const CsvOptions& options = {});

/// Reads a comma-separated file of features only (no label column).
Matrix load_features_csv(const std::filesystem::path& path);

/// Writes features followed by a trailing label column, with a header row.
/// Values use the shortest round-trip decimal form.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& label_header = "label");

/// Two interleaving half circles. Class 0 (upper arc) gets ceil(n/2) points.
Dataset make_moons(std::size_t n, double noise, std::uint64_t seed);

/// Concentric circles: class 0 on radius 1, class 1 on radius `factor`.
Dataset make_circles(std::size_t n, double noise, double factor, std::uint64_t seed);

/// Isotropic 2-D Gaussian blobs with centers drawn uniformly from [-10, 10]^2.
Dataset make_gaussians(std::size_t n, int n_classes, double spread, std::uint64_t seed);

/// Stratified train/test partition. Returns (train, test).
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed);

/// Subset of rows, keeping names and class count.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices);

}  // namespace superk
