#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "superk/dataset.hpp"
#include "superk/matrix.hpp"
#include "superk/tessellation.hpp"

namespace superk {

struct Hyperparams {
  std::size_t k = 10;                    // requested voxels per class
  std::size_t em_cycles = 10;            // 0 disables EM
  std::size_t correction_cycles = 50;    // 0 disables correction

  void validate() const;
};

/// Default k grid searched by cross-validation when no k is given.
inline const std::vector<std::size_t>& default_k_grid() {
  static const std::vector<std::size_t> grid{2, 3, 5, 8, 12, 17, 25, 40};
  return grid;
}

/// Training accuracies and generator counts at each stage of fit().
struct TrainTrace {
  double voxel_accuracy = 0.0;  // voxel means, merged and relabeled
  double em_accuracy = 0.0;     // after EM, merged and relabeled (input to correction)
  std::vector<double> correction_accuracies;  // after each correction cycle
  double best_accuracy = 0.0;                 // accuracy of the returned model

  std::vector<std::size_t> voxel_generators;  // per class, after voxelization
  std::vector<std::size_t> em_generators;     // per class, after EM
  std::vector<std::size_t> final_generators;  // per label, in the returned model

  std::vector<std::string> warnings;
};

/// Simple EM: assign every instance to its best generator, replace each
/// generator by its members' mean and drop generators that attracted nobody.
GeneratorSet apply_em(const Matrix& X, GeneratorSet generators, std::size_t n_cycles);

/// Concatenates per-class generators (ascending class order), assigns every
/// instance, and labels each generator by plurality vote (smallest class on
/// ties). Generators with no instances keep their origin class.
Model merge_relabel(const Matrix& X, std::span<const int> y,
                    const std::vector<GeneratorSet>& class_generators);

/// Fraction of rows whose best generator carries the row's label.
double training_accuracy(const Matrix& X, std::span<const int> y, const Model& model);

/// One correction cycle without keep-best: every generator whose cell holds
/// both correctly and wrongly labeled instances moves to
/// (p * n_all - sum(x_fp)) / (n_all - n_fp). Labels are unchanged.
Model correction_step(const Matrix& X, std::span<const int> y, const Model& model);

/// False-positive correction with keep-best. The initial model takes part in
/// keep-best, so the returned model's training accuracy never drops.
/// Accuracies after every cycle are appended to `cycle_accuracies` when given.
Model correct(const Matrix& X, std::span<const int> y, Model model, std::size_t n_cycles,
              std::vector<double>* cycle_accuracies = nullptr);

struct FitResult {
  Model model;
  TrainTrace trace;
};

/// Full pipeline: per-class voxelization and EM, merge and relabel, correction.
/// `n_classes` of 0 means max(y) + 1.
FitResult fit(const Matrix& X, std::span<const int> y, const Hyperparams& hp, int n_classes = 0);

/// fit() on a Dataset; the model carries the dataset's label names.
FitResult fit(const Dataset& data, const Hyperparams& hp);

struct CvResult {
  std::size_t best_k = 0;
  std::vector<std::pair<std::size_t, double>> mean_accuracy;  // (k, mean validation accuracy)
};

/// Stratified fold assignment: fold id per instance.
std::vector<std::size_t> stratified_folds(std::span<const int> y, int n_classes,
                                          std::size_t folds, std::uint64_t seed);

/// Chooses k by stratified cross-validation; ties go to the smallest k.
/// `hp_rest.k` is ignored. `threads` of 0 uses hardware concurrency.
CvResult cross_validate_k(const Matrix& X, std::span<const int> y,
                          std::span<const std::size_t> k_grid, std::size_t folds,
                          const Hyperparams& hp_rest, std::uint64_t seed, int n_classes = 0,
                          unsigned threads = 0);

}  // namespace superk
