#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "superk/superk.hpp"

namespace superk::cli {

namespace {

using nlohmann::json;

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 success, 1 internal error, 2 usage error, 3 data error, "
    "4 dimension mismatch, 5 model format error, 6 I/O error, 7 invalid argument.\n"
    "Results are printed to stdout as JSON; diagnostics go to stderr.";

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(flag + ": cannot parse '" + item + "' in '" + text + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

std::vector<std::size_t> parse_k_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  for (double v : parse_number_list(text, "--k-grid")) {
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw UsageError("--k-grid: values must be positive integers, got '" + text + "'");
    }
    grid.push_back(static_cast<std::size_t>(v));
  }
  return grid;
}

Bounds parse_bounds(const std::string& text) {
  const auto v = parse_number_list(text, "--bounds");
  if (v.size() != 4) throw UsageError("--bounds: expected x0,y0,x1,y1, got '" + text + "'");
  return {v[0], v[1], v[2], v[3]};
}

std::string k_grid_text(const std::vector<std::size_t>& grid) {
  std::string s;
  for (auto k : grid) s += (s.empty() ? "" : ",") + std::to_string(k);
  return s;
}

json timing_json(const TimingStats& t) {
  return {{"mean", t.mean_ms}, {"stddev", t.stddev_ms}, {"repetitions", t.repetitions}};
}

void emit(std::ostream& out, json report) {
  report["nondeterministic_fields"] = json::array({"timing"});
  out << report.dump(2) << '\n';
}

Dataset load_labeled(const std::string& path, const std::string& label_col,
                     const CsvOptions& options = {}) {
  Dataset d = load_csv(path, parse_label_column(label_col), options);
  d.validate();
  return d;
}

std::vector<std::string> model_label_names(const Model& model) {
  if (!model.label_names.empty()) return model.label_names;
  std::vector<std::string> names;
  for (int c = 0; c < model.n_classes; ++c) names.push_back(std::to_string(c));
  return names;
}

void check_model_dims(const Model& model, std::size_t data_dims) {
  if (model.dims() != data_dims) {
    throw DimensionError("model expects " + std::to_string(model.dims()) +
                         " features but the data has " + std::to_string(data_dims));
  }
}

json trace_json(const TrainTrace& t) {
  return {{"voxel_accuracy", t.voxel_accuracy},
          {"em_accuracy", t.em_accuracy},
          {"correction_accuracies", t.correction_accuracies},
          {"best_accuracy", t.best_accuracy},
          {"voxel_generators", t.voxel_generators},
          {"em_generators", t.em_generators},
          {"final_generators", t.final_generators}};
}

json cv_json(const CvResult& r) {
  json per_k = json::array();
  for (const auto& [k, acc] : r.mean_accuracy) per_k.push_back({{"k", k}, {"accuracy", acc}});
  return per_k;
}

int run_train(const TrainCmd& c, std::ostream& out, std::ostream& err) {
  const Dataset data = load_labeled(c.data, c.label_col);
  Hyperparams hp;
  hp.em_cycles = c.em_cycles;
  hp.correction_cycles = c.correction_cycles;

  json report{{"command", "train"}, {"data", c.data}, {"model", c.out}, {"seed", c.seed}};
  if (c.k) {
    hp.k = *c.k;
    report["k_source"] = "flag";
  } else {
    const CvResult cv = cross_validate_k(data.features, data.labels, default_k_grid(), 5, hp,
                                         c.seed, data.n_classes);
    hp.k = cv.best_k;
    report["k_source"] = "cv";
    report["cv"] = cv_json(cv);
  }
  report["k"] = hp.k;
  report["em_cycles"] = hp.em_cycles;
  report["correction_cycles"] = hp.correction_cycles;

  const auto t0 = std::chrono::steady_clock::now();
  const FitResult fitted = fit(data, hp);
  const double train_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& w : fitted.trace.warnings) err << "warning: " << w << '\n';

  save_model(fitted.model, c.out);
  report["training_accuracy"] = fitted.trace.best_accuracy;
  report["generators"] = fitted.model.size();
  report["n_classes"] = fitted.model.n_classes;
  report["trace"] = trace_json(fitted.trace);
  report["timing"] = {{"train_ms", train_ms}};
  emit(out, std::move(report));
  return kOk;
}

int run_predict(const PredictCmd& c, std::ostream& out, std::ostream&) {
  const Model model = load_model(c.model);
  const Matrix X = load_features_csv(c.data);
  check_model_dims(model, X.cols());
  const auto t0 = std::chrono::steady_clock::now();
  const auto pred = classify_batch(X, model);
  const double infer_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const auto names = model_label_names(model);
  std::ofstream f(c.out);
  if (!f) throw IoError("cannot write '" + c.out + "'");
  f << "label\n";
  for (int p : pred) f << names[static_cast<std::size_t>(p)] << '\n';
  if (!f) throw IoError("write failed for '" + c.out + "'");

  std::vector<std::size_t> counts(names.size(), 0);
  for (int p : pred) ++counts[static_cast<std::size_t>(p)];
  emit(out, {{"command", "predict"},
             {"model", c.model},
             {"data", c.data},
             {"out", c.out},
             {"n", pred.size()},
             {"predicted_counts", counts},
             {"timing", {{"infer_ms", infer_ms}}}});
  return kOk;
}

int run_evaluate(const EvaluateCmd& c, std::ostream& out, std::ostream&) {
  const Model model = load_model(c.model);
  CsvOptions options;
  options.known_labels = model_label_names(model);
  const Dataset data = load_labeled(c.data, c.label_col, options);
  check_model_dims(model, data.dims());

  std::vector<int> pred;
  const TimingStats infer =
      time_run([&] { pred = classify_batch(data.features, model); }, 0.0, 1);
  EvalReport r = make_report(data.labels, pred, model.n_classes);
  r.infer_time = infer;

  emit(out, {{"command", "evaluate"},
             {"model", c.model},
             {"data", c.data},
             {"n", data.size()},
             {"accuracy", r.accuracy},
             {"per_class_correct", r.per_class_correct},
             {"per_class_total", r.per_class_total},
             {"confusion", r.confusion},
             {"label_names", options.known_labels.value()},
             {"timing", {{"train_time_ms", nullptr}, {"infer_time_ms", timing_json(infer)}}}});
  return kOk;
}

int run_cv(const CvCmd& c, std::ostream& out, std::ostream&) {
  const Dataset data = load_labeled(c.data, c.label_col);
  const auto t0 = std::chrono::steady_clock::now();
  const CvResult r =
      cross_validate_k(data.features, data.labels, c.k_grid, c.folds, Hyperparams{}, c.seed,
                       data.n_classes);
  const double cv_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  emit(out, {{"command", "cv"},
             {"data", c.data},
             {"folds", c.folds},
             {"seed", c.seed},
             {"k_grid", c.k_grid},
             {"best_k", r.best_k},
             {"per_k", cv_json(r)},
             {"timing", {{"cv_ms", cv_ms}}}});
  return kOk;
}

int run_synth(const SynthCmd& c, std::ostream& out, std::ostream&) {
  Dataset d;
  double noise = 0.0;
  if (c.kind == "moons") {
    noise = c.noise.value_or(0.15);
    d = make_moons(c.n, noise, c.seed);
  } else if (c.kind == "circles") {
    noise = c.noise.value_or(0.05);
    d = make_circles(c.n, noise, c.factor, c.seed);
  } else {
    d = make_gaussians(c.n, c.classes, c.spread, c.seed);
  }
  save_csv(d, c.out);
  json report{{"command", "synth"}, {"kind", c.kind}, {"n", d.size()},
              {"seed", c.seed},     {"out", c.out},   {"class_counts", d.class_counts()}};
  if (c.kind == "gaussians") {
    report["classes"] = c.classes;
    report["spread"] = c.spread;
  } else {
    report["noise"] = noise;
  }
  if (c.kind == "circles") report["factor"] = c.factor;
  emit(out, std::move(report));
  return kOk;
}

int run_raster(const RasterCmd& c, std::ostream& out, std::ostream&) {
  const Model model = load_model(c.model);
  const auto grid = raster_regions(model, c.bounds, c.resolution);
  const std::string sidecar = c.out + ".json";
  write_region_pgm(grid, c.resolution, model.n_classes, c.bounds, c.out, sidecar);
  std::vector<std::size_t> counts(static_cast<std::size_t>(model.n_classes), 0);
  for (int g : grid) ++counts[static_cast<std::size_t>(g)];
  emit(out, {{"command", "raster"},
             {"model", c.model},
             {"bounds", {c.bounds.x0, c.bounds.y0, c.bounds.x1, c.bounds.y1}},
             {"resolution", c.resolution},
             {"out", c.out},
             {"sidecar", sidecar},
             {"pixel_counts", counts}});
  return kOk;
}

int run_bench(const BenchCmd& c, std::ostream& out, std::ostream&) {
  const Dataset data = load_labeled(c.data, c.label_col);
  Hyperparams hp;
  hp.k = c.k;
  Model model;
  const TimingStats train = time_run([&] { model = fit(data, hp).model; }, c.min_ms, c.reps);
  std::vector<int> pred;
  const TimingStats infer =
      time_run([&] { pred = classify_batch(data.features, model); }, c.min_ms, c.reps);
  std::vector<int> knn_pred;
  const TimingStats knn =
      time_run([&] { knn_pred = knn_predict(data, data.features, 1); }, c.min_ms, c.reps);
  emit(out, {{"command", "bench"},
             {"data", c.data},
             {"k", c.k},
             {"n", data.size()},
             {"generators", model.size()},
             {"training_accuracy", accuracy(data.labels, pred)},
             {"knn1_training_accuracy", accuracy(data.labels, knn_pred)},
             {"timing",
              {{"train_time_ms", timing_json(train)},
               {"infer_time_ms", timing_json(infer)},
               {"knn1_infer_time_ms", timing_json(knn)},
               {"min_ms", c.min_ms}}}});
  return kOk;
}

}  // namespace

Command parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Super-k: labeled Voronoi tessellation classifier", "superk"};
  app.require_subcommand(1, 1);
  app.footer(kExitCodeHelp);

  TrainCmd train;
  std::size_t train_k = 0;
  auto* t = app.add_subcommand("train", "Fit a model and save it as JSON");
  t->add_option("--data", train.data, "Training CSV")->required();
  t->add_option("--label-col", train.label_col,
                "Label column name or zero-based index (negative counts from the end)")
      ->capture_default_str();
  auto* k_opt = t->add_option("--k", train_k,
                              "Requested voxels per class (default: 5-fold CV over " +
                                  k_grid_text(default_k_grid()) + ")");
  t->add_option("--em-cycles", train.em_cycles, "EM cycles per class")->capture_default_str();
  t->add_option("--correction-cycles", train.correction_cycles, "Correction cycles")
      ->capture_default_str();
  t->add_option("--out", train.out, "Model output path")->required();
  t->add_option("--seed", train.seed, "Seed for cross-validation folds")->capture_default_str();

  PredictCmd predict;
  auto* p = app.add_subcommand("predict", "Write predicted labels for a features-only CSV");
  p->add_option("--model", predict.model, "Model JSON")->required();
  p->add_option("--data", predict.data, "Features CSV (no label column)")->required();
  p->add_option("--out", predict.out, "Output CSV of labels")->required();

  EvaluateCmd evaluate;
  auto* e = app.add_subcommand("evaluate", "Accuracy and confusion matrix on a labeled CSV");
  e->add_option("--model", evaluate.model, "Model JSON")->required();
  e->add_option("--data", evaluate.data, "Labeled CSV")->required();
  e->add_option("--label-col", evaluate.label_col, "Label column name or index")
      ->capture_default_str();

  CvCmd cv;
  std::string k_grid = k_grid_text(default_k_grid());
  auto* v = app.add_subcommand("cv", "Choose k by stratified cross-validation");
  v->add_option("--data", cv.data, "Labeled CSV")->required();
  v->add_option("--label-col", cv.label_col, "Label column name or index")->capture_default_str();
  v->add_option("--k-grid", k_grid, "Comma-separated k values")->capture_default_str();
  v->add_option("--folds", cv.folds, "Number of folds")->capture_default_str();
  v->add_option("--seed", cv.seed, "Fold assignment seed")->capture_default_str();

  SynthCmd synth;
  double noise = 0.0;
  auto* s = app.add_subcommand("synth", "Generate a synthetic 2-D dataset as CSV");
  s->add_option("--kind", synth.kind, "moons | circles | gaussians")
      ->required()
      ->check(CLI::IsMember({"moons", "circles", "gaussians"}));
  s->add_option("--n", synth.n, "Instance count")->capture_default_str();
  auto* noise_opt =
      s->add_option("--noise", noise, "Gaussian noise stddev (default 0.15 moons, 0.05 circles)");
  s->add_option("--factor", synth.factor, "Inner/outer radius ratio for circles")
      ->capture_default_str();
  s->add_option("--classes", synth.classes, "Class count for gaussians")->capture_default_str();
  s->add_option("--spread", synth.spread, "Blob stddev for gaussians")->capture_default_str();
  s->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  s->add_option("--out", synth.out, "Output CSV")->required();

  RasterCmd raster;
  std::string bounds;
  auto* r = app.add_subcommand("raster", "Rasterize a 2-D model's decision regions to PGM");
  r->add_option("--model", raster.model, "Model JSON")->required();
  r->add_option("--bounds", bounds, "x0,y0,x1,y1")->required();
  r->add_option("--resolution", raster.resolution, "Pixels per axis")->capture_default_str();
  r->add_option("--out", raster.out, "Output PGM (sidecar JSON at <out>.json)")->required();

  BenchCmd bench;
  auto* b = app.add_subcommand("bench", "Time training and batched inference");
  b->add_option("--data", bench.data, "Labeled CSV")->required();
  b->add_option("--label-col", bench.label_col, "Label column name or index")
      ->capture_default_str();
  b->add_option("--k", bench.k, "Requested voxels per class")->capture_default_str();
  b->add_option("--reps", bench.reps, "Repetitions")->capture_default_str();
  b->add_option("--min-ms", bench.min_ms, "Minimum duration of each repetition in ms")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    return HelpCmd{target->help()};
  } catch (const CLI::ParseError& err) {
    throw UsageError(err.what());
  }

  if (t->parsed()) {
    if (k_opt->count() > 0) {
      if (train_k < 1) throw UsageError("--k: must be at least 1");
      train.k = train_k;
    }
    return train;
  }
  if (p->parsed()) return predict;
  if (e->parsed()) return evaluate;
  if (v->parsed()) {
    cv.k_grid = parse_k_grid(k_grid);
    if (cv.folds < 2) throw UsageError("--folds: must be at least 2");
    return cv;
  }
  if (s->parsed()) {
    if (noise_opt->count() > 0) synth.noise = noise;
    return synth;
  }
  if (r->parsed()) {
    raster.bounds = parse_bounds(bounds);
    return raster;
  }
  if (bench.reps < 1) throw UsageError("--reps: must be at least 1");
  return bench;
}

int run(const Command& cmd, std::ostream& out, std::ostream& err) {
  return std::visit(
      [&](const auto& c) -> int {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TrainCmd>) return run_train(c, out, err);
        if constexpr (std::is_same_v<T, PredictCmd>) return run_predict(c, out, err);
        if constexpr (std::is_same_v<T, EvaluateCmd>) return run_evaluate(c, out, err);
        if constexpr (std::is_same_v<T, CvCmd>) return run_cv(c, out, err);
        if constexpr (std::is_same_v<T, SynthCmd>) return run_synth(c, out, err);
        if constexpr (std::is_same_v<T, RasterCmd>) return run_raster(c, out, err);
        if constexpr (std::is_same_v<T, BenchCmd>) return run_bench(c, out, err);
        if constexpr (std::is_same_v<T, HelpCmd>) {
          out << c.text;
          return kOk;
        }
      },
      cmd);
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(parse_args(args), out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << "dimension mismatch: " << e.what() << '\n';
    return kDimensionMismatch;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ModelFormatError& e) {
    err << "model format error: " << e.what() << '\n';
    return kModelFormat;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kInvalidArgument;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace superk::cli
