#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "superk/matrix.hpp"

namespace superk {

/// Ordered generator points of a (labeled or per-class) Voronoi tessellation,
/// optionally carrying the cached offsets 0.5 * |p_i|^2.
class GeneratorSet {
 public:
  GeneratorSet() = default;
  explicit GeneratorSet(Matrix points) : points_(std::move(points)) {}

  const Matrix& points() const { return points_; }
  std::size_t size() const { return points_.rows(); }
  std::size_t dims() const { return points_.cols(); }
  std::span<const double> point(std::size_t i) const { return points_.row(i); }

  bool has_offsets() const { return !offsets_.empty() || points_.rows() == 0; }
  std::span<const double> offsets() const { return offsets_; }

  /// Cached offset when present, else computed on the fly (same arithmetic).
  double offset(std::size_t i) const;

  friend bool operator==(const GeneratorSet&, const GeneratorSet&) = default;

 private:
  friend GeneratorSet precompute_offsets(GeneratorSet set);

  Matrix points_;
  std::vector<double> offsets_;
};

/// Returns `set` with offsets[i] = 0.5 * (p_i . p_i).
GeneratorSet precompute_offsets(GeneratorSet set);

/// Labeled tessellation: the trained classifier.
struct Model {
  static constexpr int kFormatVersion = 1;

  GeneratorSet generators;
  std::vector<int> labels;  // one class id per generator
  int n_classes = 0;
  int format_version = kFormatVersion;
  std::vector<std::string> label_names;  // optional

  std::size_t dims() const { return generators.dims(); }
  std::size_t size() const { return generators.size(); }

  /// Throws DimensionError / InvalidArgument when the invariants do not hold.
  void validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

/// Scores g_i(x) = x . p_i - 0.5 * |p_i|^2 for every generator.
std::vector<double> likelihood(std::span<const double> x, const GeneratorSet& set);

/// Index of the generator with the highest likelihood, lowest index on ties.
std::size_t best_generator(std::span<const double> x, const GeneratorSet& set);

/// Index of the Euclidean-nearest generator, lowest index on ties.
std::size_t nearest_euclidean(std::span<const double> x, const GeneratorSet& set);

int classify(std::span<const double> x, const Model& model);

struct BatchOptions {
  std::size_t block_rows = 256;  // rows of the score buffer held at once
  unsigned threads = 1;          // worker threads over blocks; 0 = hardware concurrency
};

/// Best-generator index for every row of X.
std::vector<std::size_t> assign_batch(const Matrix& X, const GeneratorSet& set,
                                      const BatchOptions& options = {});

/// Labels for every row of X, identical to classify() row by row.
std::vector<int> classify_batch(const Matrix& X, const Model& model,
                                const BatchOptions& options = {});

}  // namespace superk
