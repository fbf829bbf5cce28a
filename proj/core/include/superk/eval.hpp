#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "superk/dataset.hpp"
#include "superk/tessellation.hpp"

namespace superk {

double accuracy(std::span<const int> y_true, std::span<const int> y_pred);

/// confusion[t][p] counts instances of true class t predicted as p.
std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> y_true,
                                                       std::span<const int> y_pred,
                                                       int n_classes);

struct TimingStats {
  double mean_ms = 0.0;
  double stddev_ms = 0.0;  // sample standard deviation, 0 for a single repetition
  std::size_t repetitions = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<std::size_t> per_class_correct;
  std::vector<std::size_t> per_class_total;
  std::vector<std::vector<std::size_t>> confusion;
  std::optional<TimingStats> train_time;
  std::optional<TimingStats> infer_time;
};

EvalReport make_report(std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

/// Plain k-nearest-neighbour vote with uniform weights. Distance ties go to the
/// lower training index, vote ties to the smaller class id.
std::vector<int> knn_predict(const Dataset& train, const Matrix& X_test, std::size_t k_neighbors);

struct Bounds {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

/// Label grid of a 2-D model. grid[r * resolution + c] is the class at the
/// cell center (x0 + (c + 0.5) dx, y0 + (r + 0.5) dy), so row 0 is the lowest y.
std::vector<int> raster_regions(const Model& model, Bounds bounds, std::size_t resolution);

/// Writes an ASCII PGM (P2) with the top image row at the highest y, and a
/// JSON sidecar at `sidecar` describing bounds, resolution and orientation.
void write_region_pgm(std::span<const int> grid, std::size_t resolution, int n_classes,
                      Bounds bounds, const std::filesystem::path& pgm,
                      const std::filesystem::path& sidecar);

/// Each repetition invokes `action` repeatedly until at least
/// `min_duration_ms` has elapsed and records the mean time per invocation.
/// Returns the mean and sample standard deviation over repetitions.
TimingStats time_run(const std::function<void()>& action, double min_duration_ms,
                     std::size_t repetitions);

}  // namespace superk
