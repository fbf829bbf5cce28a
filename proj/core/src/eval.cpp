#include "superk/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "superk/error.hpp"

namespace superk {

double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw InvalidArgument("accuracy: " + std::to_string(y_true.size()) + " true labels vs " +
                          std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw InvalidArgument("accuracy: empty label vectors");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> y_true,
                                                       std::span<const int> y_pred,
                                                       int n_classes) {
  if (y_true.size() != y_pred.size()) throw InvalidArgument("confusion_matrix: length mismatch");
  const auto k = static_cast<std::size_t>(n_classes);
  std::vector<std::vector<std::size_t>> cm(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes) {
      throw InvalidArgument("confusion_matrix: label outside [0, n_classes)");
    }
    ++cm[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
  }
  return cm;
}

EvalReport make_report(std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
  EvalReport report;
  report.accuracy = accuracy(y_true, y_pred);
  report.confusion = confusion_matrix(y_true, y_pred, n_classes);
  for (std::size_t c = 0; c < report.confusion.size(); ++c) {
    report.per_class_correct.push_back(report.confusion[c][c]);
    report.per_class_total.push_back(
        std::accumulate(report.confusion[c].begin(), report.confusion[c].end(), std::size_t{0}));
  }
  return report;
}

std::vector<int> knn_predict(const Dataset& train, const Matrix& X_test, std::size_t k_neighbors) {
  const std::size_t n = train.size();
  if (k_neighbors < 1 || k_neighbors > n) {
    throw InvalidArgument("knn_predict: k_neighbors must lie in [1, " + std::to_string(n) + "]");
  }
  if (X_test.rows() > 0 && X_test.cols() != train.dims()) {
    throw DimensionError("knn_predict: test data has " + std::to_string(X_test.cols()) +
                         " features, training data has " + std::to_string(train.dims()));
  }
  const int n_classes = std::max(train.n_classes, 1);

  std::vector<int> out(X_test.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<std::size_t> votes(static_cast<std::size_t>(n_classes));
  for (std::size_t r = 0; r < X_test.rows(); ++r) {
    const auto x = X_test.row(r);
    for (std::size_t i = 0; i < n; ++i) dist[i] = {squared_distance(x, train.features.row(i)), i};
    // Pairs compare by distance, then index.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_neighbors),
                      dist.end());
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t j = 0; j < k_neighbors; ++j) {
      ++votes[static_cast<std::size_t>(train.labels[dist[j].second])];
    }
    out[r] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

std::vector<int> raster_regions(const Model& model, Bounds bounds, std::size_t resolution) {
  if (model.dims() != 2) {
    throw DimensionError("raster_regions: model has " + std::to_string(model.dims()) +
                         " dimensions, need 2");
  }
  if (resolution < 2) throw InvalidArgument("raster_regions: resolution must be at least 2");
  if (!(bounds.x1 > bounds.x0 && bounds.y1 > bounds.y0)) {
    throw InvalidArgument("raster_regions: bounds must satisfy x0 < x1 and y0 < y1");
  }
  const double dx = (bounds.x1 - bounds.x0) / static_cast<double>(resolution);
  const double dy = (bounds.y1 - bounds.y0) / static_cast<double>(resolution);
  Matrix centers(resolution * resolution, 2);
  for (std::size_t r = 0; r < resolution; ++r) {
    for (std::size_t c = 0; c < resolution; ++c) {
      centers(r * resolution + c, 0) = bounds.x0 + (static_cast<double>(c) + 0.5) * dx;
      centers(r * resolution + c, 1) = bounds.y0 + (static_cast<double>(r) + 0.5) * dy;
    }
  }
  return classify_batch(centers, model);
}

void write_region_pgm(std::span<const int> grid, std::size_t resolution, int n_classes,
                      Bounds bounds, const std::filesystem::path& pgm,
                      const std::filesystem::path& sidecar) {
  if (grid.size() != resolution * resolution) {
    throw InvalidArgument("write_region_pgm: grid size does not match resolution");
  }
  const int maxval = std::max(n_classes - 1, 1);
  {
    std::ofstream out(pgm);
    if (!out) throw IoError("cannot write '" + pgm.string() + "'");
    out << "P2\n" << resolution << ' ' << resolution << '\n' << maxval << '\n';
    for (std::size_t r = resolution; r-- > 0;) {
      for (std::size_t c = 0; c < resolution; ++c) {
        out << grid[r * resolution + c] << (c + 1 < resolution ? ' ' : '\n');
      }
    }
    if (!out) throw IoError("write failed for '" + pgm.string() + "'");
  }
  nlohmann::json meta;
  meta["bounds"] = {bounds.x0, bounds.y0, bounds.x1, bounds.y1};
  meta["resolution"] = resolution;
  meta["n_classes"] = n_classes;
  meta["maxval"] = maxval;
  meta["sample_at"] = "cell_center";
  meta["top_row"] = "y_max";
  std::ofstream out(sidecar);
  if (!out) throw IoError("cannot write '" + sidecar.string() + "'");
  out << meta.dump(1) << '\n';
}

TimingStats time_run(const std::function<void()>& action, double min_duration_ms,
                     std::size_t repetitions) {
  if (repetitions < 1) throw InvalidArgument("time_run: repetitions must be at least 1");
  using clock = std::chrono::steady_clock;
  std::vector<double> per_call(repetitions);
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    std::size_t calls = 0;
    const auto start = clock::now();
    double elapsed = 0.0;
    do {
      action();
      ++calls;
      elapsed = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    } while (elapsed < min_duration_ms);
    per_call[rep] = elapsed / static_cast<double>(calls);
  }
  TimingStats stats;
  stats.repetitions = repetitions;
  stats.mean_ms = std::accumulate(per_call.begin(), per_call.end(), 0.0) /
                  static_cast<double>(repetitions);
  if (repetitions > 1) {
    double ss = 0.0;
    for (double v : per_call) ss += (v - stats.mean_ms) * (v - stats.mean_ms);
    stats.stddev_ms = std::sqrt(ss / static_cast<double>(repetitions - 1));
  }
  return stats;
}

}  // namespace superk
