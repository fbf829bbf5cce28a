#include "superk/tessellation.hpp"

#include <algorithm>
#include <thread>

#include "superk/error.hpp"

namespace superk {

namespace {

void check_dims(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": point has " + std::to_string(got) +
                         " features, generators have " + std::to_string(want));
  }
}

void check_nonempty(const GeneratorSet& set, const char* what) {
  if (set.size() == 0) throw InvalidArgument(std::string(what) + ": empty generator set");
}

std::size_t argmax_first(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace

double GeneratorSet::offset(std::size_t i) const {
  if (!offsets_.empty()) return offsets_[i];
  const auto p = points_.row(i);
  return 0.5 * dot(p, p);
}

GeneratorSet precompute_offsets(GeneratorSet set) {
  set.offsets_.resize(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto p = set.points_.row(i);
    set.offsets_[i] = 0.5 * dot(p, p);
  }
  return set;
}

void Model::validate() const {
  if (generators.size() == 0) throw InvalidArgument("model has no generators");
  if (labels.size() != generators.size()) {
    throw InvalidArgument("model has " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(generators.size()) + " generators");
  }
  for (int y : labels) {
    if (y < 0 || y >= n_classes) {
      throw InvalidArgument("model label " + std::to_string(y) + " outside [0, " +
                            std::to_string(n_classes) + ")");
    }
  }
  if (!label_names.empty() && label_names.size() != static_cast<std::size_t>(n_classes)) {
    throw InvalidArgument("model has " + std::to_string(label_names.size()) +
                          " label names for " + std::to_string(n_classes) + " classes");
  }
}

std::vector<double> likelihood(std::span<const double> x, const GeneratorSet& set) {
  check_dims(x.size(), set.dims(), "likelihood");
  std::vector<double> scores(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) scores[i] = dot(x, set.point(i)) - set.offset(i);
  return scores;
}

std::size_t best_generator(std::span<const double> x, const GeneratorSet& set) {
  check_nonempty(set, "best_generator");
  return argmax_first(likelihood(x, set));
}

std::size_t nearest_euclidean(std::span<const double> x, const GeneratorSet& set) {
  check_nonempty(set, "nearest_euclidean");
  check_dims(x.size(), set.dims(), "nearest_euclidean");
  std::size_t best = 0;
  double best_d = squared_distance(x, set.point(0));
  for (std::size_t i = 1; i < set.size(); ++i) {
    const double d = squared_distance(x, set.point(i));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

int classify(std::span<const double> x, const Model& model) {
  return model.labels[best_generator(x, model.generators)];
}

std::vector<std::size_t> assign_batch(const Matrix& X, const GeneratorSet& set,
                                      const BatchOptions& options) {
  check_nonempty(set, "assign_batch");
  if (X.rows() > 0) check_dims(X.cols(), set.dims(), "assign_batch");
  const std::size_t n = set.size();
  const std::size_t block = std::max<std::size_t>(options.block_rows, 1);
  const std::size_t n_blocks = (X.rows() + block - 1) / block;

  std::vector<double> offsets(n);
  for (std::size_t j = 0; j < n; ++j) offsets[j] = set.offset(j);

  std::vector<std::size_t> out(X.rows());
  auto run_block = [&](std::size_t b, std::vector<double>& scores) {
    const std::size_t begin = b * block;
    const std::size_t end = std::min(begin + block, X.rows());
    for (std::size_t r = begin; r < end; ++r) {
      const auto x = X.row(r);
      double* row_scores = scores.data() + (r - begin) * n;
      for (std::size_t j = 0; j < n; ++j) row_scores[j] = dot(x, set.point(j)) - offsets[j];
    }
    for (std::size_t r = begin; r < end; ++r) {
      out[r] = argmax_first({scores.data() + (r - begin) * n, n});
    }
  };

  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));
  if (threads <= 1) {
    std::vector<double> scores(block * n);
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b, scores);
    return out;
  }
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      std::vector<double> scores(block * n);
      for (std::size_t b = t; b < n_blocks; b += threads) run_block(b, scores);
    });
  }
  workers.clear();
  return out;
}

std::vector<int> classify_batch(const Matrix& X, const Model& model, const BatchOptions& options) {
  const auto idx = assign_batch(X, model.generators, options);
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = model.labels[idx[i]];
  return out;
}

}  // namespace superk
