#include "superk/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "superk/error.hpp"

namespace superk {

double GridPlan::grid_size() const {
  return std::pow(static_cast<double>(a), static_cast<double>(m - m_v)) *
         std::pow(static_cast<double>(b), static_cast<double>(m_v));
}

std::vector<std::size_t> GridPlan::division_multiset() const {
  std::vector<std::size_t> out(m, a);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m_v), b);
  std::sort(out.begin(), out.end());
  return out;
}

void GridPlan::assign_variants(std::vector<std::size_t> indices) {
  if (indices.size() != m_v) {
    throw InvalidArgument("assign_variants: expected " + std::to_string(m_v) + " indices, got " +
                          std::to_string(indices.size()));
  }
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end() ||
      (!indices.empty() && indices.back() >= m)) {
    throw InvalidArgument("assign_variants: indices must be distinct and below m");
  }
  variant_indices = std::move(indices);
  divisions.assign(m, a);
  for (auto i : variant_indices) divisions[i] = b;
}

GridPlan plan_grid(std::size_t m, std::size_t k) {
  if (m < 1) throw InvalidArgument("plan_grid: m must be at least 1");
  if (k < 1) throw InvalidArgument("plan_grid: k must be at least 1");
  GridPlan plan;
  plan.m = m;
  plan.k = k;
  plan.c = std::exp(std::log(static_cast<double>(k)) / static_cast<double>(m));
  const double nearest = std::round(plan.c);
  if (std::abs(plan.c - nearest) < 1e-9) plan.c = nearest;
  plan.a = static_cast<std::size_t>(std::floor(plan.c));
  plan.b = static_cast<std::size_t>(std::ceil(plan.c));
  if (plan.a == plan.b) {
    plan.m_v = 0;
  } else {
    const double a = static_cast<double>(plan.a);
    const double b = static_cast<double>(plan.b);
    const double raw = static_cast<double>(m) * std::log(plan.c / a) / std::log(b / a);
    // llround rounds halves away from zero.
    const long long mv = std::llround(raw);
    plan.m_v = static_cast<std::size_t>(std::clamp<long long>(mv, 0, static_cast<long long>(m)));
  }
  return plan;
}

std::vector<std::size_t> count_unique_values(const Matrix& features) {
  std::vector<std::size_t> counts(features.cols(), 0);
  std::vector<double> column(features.rows());
  for (std::size_t c = 0; c < features.cols(); ++c) {
    for (std::size_t r = 0; r < features.rows(); ++r) column[r] = features(r, c);
    std::sort(column.begin(), column.end());
    counts[c] = static_cast<std::size_t>(std::unique(column.begin(), column.end()) - column.begin());
  }
  return counts;
}

std::vector<std::size_t> select_variant_features(std::span<const std::size_t> counts,
                                                 std::size_t m_v) {
  if (m_v > counts.size()) {
    throw InvalidArgument("select_variant_features: m_v exceeds the number of features");
  }
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return counts[x] > counts[y]; });
  order.resize(m_v);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<Range> column_ranges(const Matrix& features) {
  std::vector<Range> ranges(features.cols());
  if (features.rows() == 0) return ranges;
  for (std::size_t c = 0; c < features.cols(); ++c) ranges[c] = {features(0, c), features(0, c)};
  for (std::size_t r = 1; r < features.rows(); ++r) {
    for (std::size_t c = 0; c < features.cols(); ++c) {
      ranges[c].lo = std::min(ranges[c].lo, features(r, c));
      ranges[c].hi = std::max(ranges[c].hi, features(r, c));
    }
  }
  return ranges;
}

std::size_t quantize_value(double v, Range range, std::size_t divisions) {
  if (divisions <= 1 || !(range.hi > range.lo)) return 0;
  const double t = (v - range.lo) / (range.hi - range.lo) * static_cast<double>(divisions);
  if (!(t > 0.0)) return 0;
  const double idx = std::floor(t);
  const double last = static_cast<double>(divisions - 1);
  return static_cast<std::size_t>(std::min(idx, last));
}

std::vector<std::vector<std::size_t>> quantize(const Matrix& features,
                                               std::span<const std::size_t> divisions,
                                               std::span<const Range> ranges) {
  if (divisions.size() != features.cols() || ranges.size() != features.cols()) {
    throw DimensionError("quantize: divisions/ranges do not match the feature count");
  }
  std::vector<std::vector<std::size_t>> out(features.rows(),
                                            std::vector<std::size_t>(features.cols()));
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t c = 0; c < features.cols(); ++c) {
      out[r][c] = quantize_value(features(r, c), ranges[c], divisions[c]);
    }
  }
  return out;
}

VoxelTable build_voxels(const Matrix& features, const GridPlan& plan) {
  if (plan.divisions.size() != features.cols()) {
    throw DimensionError("build_voxels: plan has " + std::to_string(plan.divisions.size()) +
                         " dimensions, data has " + std::to_string(features.cols()));
  }
  // Dimensions with a single division contribute a constant 0 index and are
  // left out of the key.
  std::vector<std::size_t> dims;
  for (std::size_t c = 0; c < plan.divisions.size(); ++c) {
    if (plan.divisions[c] > 1) dims.push_back(c);
  }
  const auto all_ranges = column_ranges(features);

  VoxelTable table;
  std::vector<std::size_t> key(dims.size());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t j = 0; j < dims.size(); ++j) {
      const auto c = dims[j];
      key[j] = quantize_value(features(r, c), all_ranges[c], plan.divisions[c]);
    }
    auto& cell = table[key];
    if (cell.count == 0) cell.mean.assign(features.cols(), 0.0);
    ++cell.count;
    const auto x = features.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) cell.mean[c] += x[c];
  }
  for (auto& [_, cell] : table) {
    for (auto& v : cell.mean) v /= static_cast<double>(cell.count);
  }
  return table;
}

std::pair<GeneratorSet, GridPlan> voxelize_class_with_plan(const Matrix& features, std::size_t k) {
  if (features.rows() < 1) throw InvalidArgument("voxelize_class: no instances");
  GridPlan plan = plan_grid(features.cols(), k);
  const auto counts = count_unique_values(features);
  plan.assign_variants(select_variant_features(counts, plan.m_v));
  const VoxelTable table = build_voxels(features, plan);

  Matrix means(table.size(), features.cols());
  std::size_t i = 0;
  for (const auto& [_, cell] : table) {
    std::copy(cell.mean.begin(), cell.mean.end(), means.row(i).begin());
    ++i;
  }
  return {GeneratorSet(std::move(means)), std::move(plan)};
}

GeneratorSet voxelize_class(const Matrix& features, std::size_t k) {
  return voxelize_class_with_plan(features, k).first;
}

}  // namespace superk
