#include "superk/training.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

#include "superk/error.hpp"
#include "superk/random.hpp"
#include "superk/voxelize.hpp"

namespace superk {

namespace {

void check_xy(const Matrix& X, std::span<const int> y) {
  if (X.rows() != y.size()) {
    throw DimensionError("feature matrix has " + std::to_string(X.rows()) + " rows but " +
                         std::to_string(y.size()) + " labels were given");
  }
}

int infer_classes(std::span<const int> y, int n_classes) {
  int max_label = -1;
  for (int v : y) {
    if (v < 0) throw DataError("negative class label " + std::to_string(v));
    max_label = std::max(max_label, v);
  }
  if (n_classes == 0) return max_label + 1;
  if (max_label >= n_classes) {
    throw DataError("label " + std::to_string(max_label) + " outside [0, " +
                    std::to_string(n_classes) + ")");
  }
  return n_classes;
}

double accuracy_of(std::span<const std::size_t> assign, std::span<const int> labels,
                   std::span<const int> y) {
  if (y.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t j = 0; j < y.size(); ++j) hits += labels[assign[j]] == y[j] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

template <class Job>
void run_parallel(std::size_t n_jobs, unsigned threads, Job job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_jobs));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n_jobs; i = next++) job(i);
    });
  }
}

}  // namespace

void Hyperparams::validate() const {
  if (k < 1) throw InvalidArgument("k must be at least 1");
}

GeneratorSet apply_em(const Matrix& X, GeneratorSet generators, std::size_t n_cycles) {
  if (n_cycles == 0) return generators;
  if (generators.size() == 0) throw InvalidArgument("apply_em: empty generator set");
  if (X.cols() != generators.dims()) {
    throw DimensionError("apply_em: data has " + std::to_string(X.cols()) +
                         " features, generators have " + std::to_string(generators.dims()));
  }
  if (X.rows() == 0) return generators;

  const std::size_t m = X.cols();
  for (std::size_t cycle = 0; cycle < n_cycles; ++cycle) {
    const auto assign = assign_batch(X, precompute_offsets(generators));
    const std::size_t n = generators.size();
    std::vector<std::size_t> counts(n, 0);
    Matrix sums(n, m);
    for (std::size_t j = 0; j < X.rows(); ++j) {
      ++counts[assign[j]];
      auto s = sums.row(assign[j]);
      const auto x = X.row(j);
      for (std::size_t c = 0; c < m; ++c) s[c] += x[c];
    }
    Matrix next;
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[i] == 0) continue;
      auto s = sums.row(i);
      for (auto& v : s) v /= static_cast<double>(counts[i]);
      next.append_row(s);
    }
    generators = GeneratorSet(std::move(next));
  }
  return generators;
}

Model merge_relabel(const Matrix& X, std::span<const int> y,
                    const std::vector<GeneratorSet>& class_generators) {
  check_xy(X, y);
  const int n_classes = static_cast<int>(class_generators.size());
  infer_classes(y, n_classes);

  Matrix points;
  std::vector<int> origin;
  for (int c = 0; c < n_classes; ++c) {
    const auto& set = class_generators[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set.dims() != X.cols()) {
        throw DimensionError("merge_relabel: class " + std::to_string(c) + " generators have " +
                             std::to_string(set.dims()) + " features, data has " +
                             std::to_string(X.cols()));
      }
      points.append_row(set.point(i));
      origin.push_back(c);
    }
  }
  if (origin.empty()) throw InvalidArgument("merge_relabel: no generators");

  Model model;
  model.generators = precompute_offsets(GeneratorSet(std::move(points)));
  model.n_classes = n_classes;
  model.labels = origin;

  const std::size_t n = model.size();
  const auto assign = assign_batch(X, model.generators);
  std::vector<std::size_t> votes(n * static_cast<std::size_t>(n_classes), 0);
  for (std::size_t j = 0; j < y.size(); ++j) {
    ++votes[assign[j] * static_cast<std::size_t>(n_classes) + static_cast<std::size_t>(y[j])];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto* v = votes.data() + i * static_cast<std::size_t>(n_classes);
    std::size_t best = 0;
    for (std::size_t c = 1; c < static_cast<std::size_t>(n_classes); ++c) {
      if (v[c] > v[best]) best = c;
    }
    if (v[best] > 0) model.labels[i] = static_cast<int>(best);
  }
  return model;
}

double training_accuracy(const Matrix& X, std::span<const int> y, const Model& model) {
  check_xy(X, y);
  return accuracy_of(assign_batch(X, model.generators), model.labels, y);
}

namespace {

// Moves generators away from their cells' false positives given the current
// assignment. Returns the updated points.
Matrix corrected_points(const Matrix& X, std::span<const int> y, const Model& model,
                        std::span<const std::size_t> assign) {
  const std::size_t m = X.cols();
  const std::size_t n = model.size();
  std::vector<std::size_t> n_all(n, 0), n_fp(n, 0);
  Matrix fp_sums(n, m);
  for (std::size_t j = 0; j < y.size(); ++j) {
    const auto i = assign[j];
    ++n_all[i];
    if (model.labels[i] != y[j]) {
      ++n_fp[i];
      auto s = fp_sums.row(i);
      const auto x = X.row(j);
      for (std::size_t c = 0; c < m; ++c) s[c] += x[c];
    }
  }
  Matrix points = model.generators.points();
  for (std::size_t i = 0; i < n; ++i) {
    if (n_fp[i] == 0 || n_fp[i] >= n_all[i]) continue;
    const double total = static_cast<double>(n_all[i]);
    const double kept = static_cast<double>(n_all[i] - n_fp[i]);
    auto p = points.row(i);
    const auto s = fp_sums.row(i);
    for (std::size_t c = 0; c < m; ++c) p[c] = (p[c] * total - s[c]) / kept;
  }
  return points;
}

void check_model_data(const Matrix& X, std::span<const int> y, const Model& model) {
  check_xy(X, y);
  if (X.cols() != model.dims()) {
    throw DimensionError("correct: data has " + std::to_string(X.cols()) +
                         " features, model has " + std::to_string(model.dims()));
  }
}

}  // namespace

Model correction_step(const Matrix& X, std::span<const int> y, const Model& model) {
  check_model_data(X, y, model);
  Model out = model;
  const auto assign = assign_batch(X, model.generators);
  out.generators = precompute_offsets(GeneratorSet(corrected_points(X, y, model, assign)));
  return out;
}

Model correct(const Matrix& X, std::span<const int> y, Model model, std::size_t n_cycles,
              std::vector<double>* cycle_accuracies) {
  check_model_data(X, y, model);
  if (!model.generators.has_offsets()) model.generators = precompute_offsets(model.generators);

  auto assign = assign_batch(X, model.generators);
  double best_acc = accuracy_of(assign, model.labels, y);
  Model best = model;

  for (std::size_t cycle = 0; cycle < n_cycles; ++cycle) {
    model.generators = precompute_offsets(GeneratorSet(corrected_points(X, y, model, assign)));
    assign = assign_batch(X, model.generators);
    const double acc = accuracy_of(assign, model.labels, y);
    if (cycle_accuracies) cycle_accuracies->push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      best = model;
    }
  }
  return best;
}

FitResult fit(const Matrix& X, std::span<const int> y, const Hyperparams& hp, int n_classes) {
  hp.validate();
  check_xy(X, y);
  n_classes = infer_classes(y, n_classes);
  if (n_classes < 2) throw DataError("training needs at least 2 classes");
  if (X.cols() < 1) throw DataError("training data has no features");

  const auto k = static_cast<std::size_t>(n_classes);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t j = 0; j < y.size(); ++j) members[static_cast<std::size_t>(y[j])].push_back(j);
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].empty()) {
      throw DataError("class " + std::to_string(c) + " has no training instances");
    }
  }

  FitResult result;
  TrainTrace& trace = result.trace;
  std::vector<GeneratorSet> voxel_sets(k), em_sets(k);
  for (std::size_t c = 0; c < k; ++c) {
    const Matrix Xc = X.select_rows(members[c]);
    auto [generators, plan] = voxelize_class_with_plan(Xc, hp.k);
    if (plan.grid_size() > static_cast<double>(Xc.rows())) {
      std::ostringstream msg;
      msg << "class " << c << ": voxel grid of " << plan.grid_size() << " cells exceeds its "
          << Xc.rows() << " instances";
      trace.warnings.push_back(msg.str());
    }
    trace.voxel_generators.push_back(generators.size());
    em_sets[c] = apply_em(Xc, generators, hp.em_cycles);
    trace.em_generators.push_back(em_sets[c].size());
    voxel_sets[c] = std::move(generators);
  }

  trace.voxel_accuracy = training_accuracy(X, y, merge_relabel(X, y, voxel_sets));
  Model merged = merge_relabel(X, y, em_sets);
  trace.em_accuracy = training_accuracy(X, y, merged);

  Model model = correct(X, y, std::move(merged), hp.correction_cycles,
                        &trace.correction_accuracies);
  trace.best_accuracy = trace.em_accuracy;
  for (double a : trace.correction_accuracies) trace.best_accuracy = std::max(trace.best_accuracy, a);

  trace.final_generators.assign(k, 0);
  for (int label : model.labels) ++trace.final_generators[static_cast<std::size_t>(label)];
  result.model = std::move(model);
  return result;
}

FitResult fit(const Dataset& data, const Hyperparams& hp) {
  FitResult r = fit(data.features, data.labels, hp, data.n_classes);
  r.model.label_names = data.label_names;
  return r;
}

std::vector<std::size_t> stratified_folds(std::span<const int> y, int n_classes,
                                          std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  n_classes = infer_classes(y, n_classes);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t j = 0; j < y.size(); ++j) members[static_cast<std::size_t>(y[j])].push_back(j);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].size() < folds) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(members[c].size()) +
                      " instances, fewer than " + std::to_string(folds) + " folds");
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> fold(y.size(), 0);
  std::size_t start = 0;
  for (auto& idx : members) {
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = (start + j) % folds;
    start = (start + idx.size()) % folds;
  }
  return fold;
}

CvResult cross_validate_k(const Matrix& X, std::span<const int> y,
                          std::span<const std::size_t> k_grid, std::size_t folds,
                          const Hyperparams& hp_rest, std::uint64_t seed, int n_classes,
                          unsigned threads) {
  check_xy(X, y);
  if (k_grid.empty()) throw InvalidArgument("cross_validate_k: empty k grid");
  for (auto k : k_grid) {
    if (k < 1) throw InvalidArgument("cross_validate_k: k must be at least 1");
  }
  n_classes = infer_classes(y, n_classes);
  const auto fold_of = stratified_folds(y, n_classes, folds, seed);

  struct Split {
    Matrix train_x, val_x;
    std::vector<int> train_y, val_y;
  };
  std::vector<Split> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t j = 0; j < y.size(); ++j) (fold_of[j] == f ? va : tr).push_back(j);
    splits[f].train_x = X.select_rows(tr);
    splits[f].val_x = X.select_rows(va);
    for (auto j : tr) splits[f].train_y.push_back(y[j]);
    for (auto j : va) splits[f].val_y.push_back(y[j]);
  }

  std::vector<double> acc(k_grid.size() * folds, 0.0);
  run_parallel(acc.size(), threads, [&](std::size_t job) {
    const std::size_t ki = job / folds;
    const std::size_t f = job % folds;
    Hyperparams hp = hp_rest;
    hp.k = k_grid[ki];
    const auto& s = splits[f];
    const Model model = fit(s.train_x, s.train_y, hp, n_classes).model;
    const auto pred = classify_batch(s.val_x, model);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < pred.size(); ++j) hits += pred[j] == s.val_y[j] ? 1 : 0;
    acc[job] = static_cast<double>(hits) / static_cast<double>(pred.size());
  });

  CvResult result;
  double best = -1.0;
  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) sum += acc[ki * folds + f];
    const double mean = sum / static_cast<double>(folds);
    result.mean_accuracy.emplace_back(k_grid[ki], mean);
    if (mean > best || (mean == best && k_grid[ki] < result.best_k)) {
      best = mean;
      result.best_k = k_grid[ki];
    }
  }
  return result;
}

}  // namespace superk
