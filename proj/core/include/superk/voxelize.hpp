#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "superk/matrix.hpp"
#include "superk/tessellation.hpp"

namespace superk {

/// Geometry of the per-class voxel grid.
///
/// c = k^(1/m) is approximated by a = floor(c) divisions on ordinary
/// dimensions and b = ceil(c) divisions on m_v "variant" dimensions, with
/// m_v = round(m * ln(c/a) / ln(b/a)) so that a^(m-m_v) * b^m_v ~ k.
struct GridPlan {
  std::size_t m = 0;
  std::size_t k = 0;
  double c = 0.0;
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t m_v = 0;
  std::vector<std::size_t> variant_indices;  // sorted ascending; empty until assigned
  std::vector<std::size_t> divisions;        // per dimension

  /// Full grid size a^(m-m_v) * b^m_v as a double (may be astronomically large).
  double grid_size() const;

  /// Division counts as a sorted multiset, independent of which dimensions
  /// end up variant.
  std::vector<std::size_t> division_multiset() const;

  /// Fills variant_indices and divisions.
  void assign_variants(std::vector<std::size_t> indices);
};

GridPlan plan_grid(std::size_t m, std::size_t k);

/// Number of distinct values (exact equality) in every column.
std::vector<std::size_t> count_unique_values(const Matrix& features);

/// Indices of the m_v largest counts, ties toward the lower index, sorted ascending.
std::vector<std::size_t> select_variant_features(std::span<const std::size_t> counts,
                                                 std::size_t m_v);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-column (min, max).
std::vector<Range> column_ranges(const Matrix& features);

/// Bin index floor((v - lo) / (hi - lo) * d), clamped to [0, d-1]; 0 when hi == lo.
std::size_t quantize_value(double v, Range range, std::size_t divisions);

/// Quantizes every row of `features` (already restricted to the quantized
/// dimensions). Returns an index matrix of the same shape.
std::vector<std::vector<std::size_t>> quantize(const Matrix& features,
                                               std::span<const std::size_t> divisions,
                                               std::span<const Range> ranges);

struct VoxelCell {
  std::size_t count = 0;
  std::vector<double> mean;
};

/// Nonempty voxels keyed by index tuple over the quantized dimensions,
/// iterated in lexicographic order.
using VoxelTable = std::map<std::vector<std::size_t>, VoxelCell>;

/// Groups one class's instances into voxels according to `plan` (which must
/// have its variants assigned). Ranges are taken from `features`.
VoxelTable build_voxels(const Matrix& features, const GridPlan& plan);

/// Complete per-class voxelization: plan, variant selection, quantization and
/// voxel means. Generators come out in lexicographic voxel-index order.
GeneratorSet voxelize_class(const Matrix& features, std::size_t k);

/// Same as voxelize_class but also returns the plan used.
std::pair<GeneratorSet, GridPlan> voxelize_class_with_plan(const Matrix& features, std::size_t k);

}  // namespace superk
