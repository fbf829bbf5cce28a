#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "superk/dataset.hpp"
#include "superk/model_io.hpp"
#include "superk/training.hpp"
#include "test_util.hpp"

namespace superk::cli {
namespace {

using nlohmann::json;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ParseArgs, TrainDefaults) {
  const auto cmd = parse_args({"train", "--data", "d.csv", "--out", "m.json"});
  const auto& t = std::get<TrainCmd>(cmd);
  EXPECT_EQ(t.data, "d.csv");
  EXPECT_EQ(t.label_col, "-1");
  EXPECT_FALSE(t.k.has_value());
  EXPECT_EQ(t.em_cycles, 10u);
  EXPECT_EQ(t.correction_cycles, 50u);
}

TEST(ParseArgs, TrainExplicit) {
  const auto cmd = parse_args({"train", "--data", "d.csv", "--k", "7", "--em-cycles", "0",
                               "--correction-cycles", "3", "--out", "m.json", "--label-col",
                               "digit", "--seed", "9"});
  const auto& t = std::get<TrainCmd>(cmd);
  EXPECT_EQ(t.k, 7u);
  EXPECT_EQ(t.em_cycles, 0u);
  EXPECT_EQ(t.correction_cycles, 3u);
  EXPECT_EQ(t.label_col, "digit");
  EXPECT_EQ(t.seed, 9u);
}

TEST(ParseArgs, CvAndRasterLists) {
  const auto cv = std::get<CvCmd>(parse_args({"cv", "--data", "d.csv", "--k-grid", "2,5,9"}));
  EXPECT_EQ(cv.k_grid, (std::vector<std::size_t>{2, 5, 9}));
  EXPECT_EQ(cv.folds, 5u);
  const auto r = std::get<RasterCmd>(
      parse_args({"raster", "--model", "m", "--bounds", "-1,-2.5,3,4", "--out", "r.pgm"}));
  EXPECT_EQ(r.bounds.x0, -1.0);
  EXPECT_EQ(r.bounds.y0, -2.5);
  EXPECT_EQ(r.bounds.y1, 4.0);
  EXPECT_EQ(r.resolution, 200u);
}

TEST(ParseArgs, SynthNoiseDefaultsPerKind) {
  const auto s = std::get<SynthCmd>(parse_args({"synth", "--kind", "moons", "--out", "x"}));
  EXPECT_FALSE(s.noise.has_value());
  const auto s2 = std::get<SynthCmd>(
      parse_args({"synth", "--kind", "circles", "--noise", "0.2", "--out", "x"}));
  EXPECT_EQ(s2.noise, 0.2);
}

TEST(ParseArgs, UsageErrorsNameTheProblem) {
  auto message = [](const std::vector<std::string>& args) {
    try {
      parse_args(args);
    } catch (const UsageError& e) {
      return std::string(e.what());
    }
    return std::string("<accepted>");
  };
  EXPECT_NE(message({"train", "--data", "d", "--out", "m", "--k", "abc"}).find("--k"),
            std::string::npos);
  EXPECT_NE(message({"train", "--data", "d", "--out", "m", "--k", "0"}).find("--k"),
            std::string::npos);
  EXPECT_NE(message({"train", "--data", "d"}).find("--out"), std::string::npos);
  EXPECT_NE(message({"cv", "--data", "d", "--k-grid", "2,x"}).find("--k-grid"), std::string::npos);
  EXPECT_NE(message({"cv", "--data", "d", "--folds", "1"}).find("--folds"), std::string::npos);
  EXPECT_NE(message({"raster", "--model", "m", "--bounds", "1,2,3", "--out", "o"}).find("--bounds"),
            std::string::npos);
  EXPECT_NE(message({"synth", "--kind", "spirals", "--out", "o"}).find("--kind"),
            std::string::npos);
  EXPECT_NE(message({"train", "--k", "abc"}).find("--k"), std::string::npos);
  EXPECT_NE(message({"train", "--data", "d", "--out", "m", "--bogus"}).find("--bogus"),
            std::string::npos);
  EXPECT_NE(message({"frobnicate"}), "<accepted>");
  EXPECT_NE(message({}), "<accepted>");
}

TEST(ParseArgs, Help) {
  EXPECT_TRUE(std::holds_alternative<HelpCmd>(parse_args({"--help"})));
  const auto h = std::get<HelpCmd>(parse_args({"train", "--help"}));
  EXPECT_NE(h.text.find("--correction-cycles"), std::string::npos);
  const auto top = invoke({"--help"});
  EXPECT_EQ(top.code, kOk);
  EXPECT_NE(top.out.find("Exit codes"), std::string::npos);
}

class CliEndToEnd : public ::testing::Test {
 protected:
  testing::TempDir dir;
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

TEST_F(CliEndToEnd, SynthTrainEvaluatePredictRaster) {
  const auto synth = invoke({"synth", "--kind", "moons", "--n", "200", "--seed", "1", "--out",
                             path("moons.csv")});
  ASSERT_EQ(synth.code, kOk) << synth.err;
  EXPECT_EQ(synth.doc().at("class_counts"), json({100, 100}));
  EXPECT_EQ(synth.doc().at("noise"), 0.15);

  const auto train = invoke({"train", "--data", path("moons.csv"), "--k", "10", "--out",
                             path("m.json")});
  ASSERT_EQ(train.code, kOk) << train.err;
  const json tr = train.doc();
  EXPECT_EQ(tr.at("k"), 10);
  EXPECT_EQ(tr.at("k_source"), "flag");
  EXPECT_GE(tr.at("training_accuracy").get<double>(), 0.85);
  EXPECT_TRUE(tr.at("timing").contains("train_ms"));
  EXPECT_EQ(tr.at("nondeterministic_fields"), json({"timing"}));

  const auto eval = invoke({"evaluate", "--model", path("m.json"), "--data", path("moons.csv")});
  ASSERT_EQ(eval.code, kOk) << eval.err;
  EXPECT_DOUBLE_EQ(eval.doc().at("accuracy").get<double>(),
                   tr.at("training_accuracy").get<double>());
  EXPECT_EQ(eval.doc().at("n"), 200);

  // Features-only copy for predict.
  const Dataset d = load_csv(path("moons.csv"), -1);
  {
    std::ofstream f(path("x.csv"));
    f << "x0,x1\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
      f << d.features(i, 0) << ',' << d.features(i, 1) << '\n';
    }
  }
  const auto pred = invoke({"predict", "--model", path("m.json"), "--data", path("x.csv"),
                            "--out", path("pred.csv")});
  ASSERT_EQ(pred.code, kOk) << pred.err;
  EXPECT_EQ(pred.doc().at("n"), 200);
  const std::string labels = slurp(path("pred.csv"));
  EXPECT_EQ(labels.rfind("label\n", 0), 0u);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), '\n'), 201);

  const auto raster = invoke({"raster", "--model", path("m.json"), "--bounds", "-1.5,-1,2.5,1.5",
                              "--resolution", "32", "--out", path("r.pgm")});
  ASSERT_EQ(raster.code, kOk) << raster.err;
  EXPECT_EQ(slurp(path("r.pgm")).rfind("P2\n32 32\n1\n", 0), 0u);
  EXPECT_TRUE(std::filesystem::exists(path("r.pgm.json")));
  const json counts = raster.doc().at("pixel_counts");
  EXPECT_EQ(counts[0].get<int>() + counts[1].get<int>(), 32 * 32);
}

TEST_F(CliEndToEnd, SeparableToyTrainsPerfectly) {
  testing::write_file(dir / "toy.csv", "x,label\n0,a\n1,a\n9,b\n10,b\n");
  const auto train = invoke({"train", "--data", path("toy.csv"), "--k", "1", "--out",
                             path("toy.json")});
  ASSERT_EQ(train.code, kOk) << train.err;
  EXPECT_EQ(train.doc().at("training_accuracy"), 1.0);
  EXPECT_EQ(train.doc().at("generators"), 2);
  EXPECT_EQ(load_model(path("toy.json")).label_names, (std::vector<std::string>{"a", "b"}));
}

TEST_F(CliEndToEnd, CvOnMoonsReportsEveryK) {
  ASSERT_EQ(invoke({"synth", "--kind", "moons", "--n", "400", "--seed", "0", "--out",
                    path("moons.csv")}).code,
            kOk);
  const auto cv = invoke({"cv", "--data", path("moons.csv"), "--k-grid", "3,10,17"});
  ASSERT_EQ(cv.code, kOk) << cv.err;
  const json doc = cv.doc();
  ASSERT_EQ(doc.at("per_k").size(), 3u);
  EXPECT_EQ(doc.at("per_k")[1].at("k"), 10);
  const auto best = doc.at("best_k").get<int>();
  EXPECT_TRUE(best == 3 || best == 10 || best == 17);
}

TEST_F(CliEndToEnd, TrainWithoutKRunsCrossValidation) {
  ASSERT_EQ(invoke({"synth", "--kind", "gaussians", "--n", "120", "--classes", "2", "--out",
                    path("g.csv")}).code,
            kOk);
  const auto train = invoke({"train", "--data", path("g.csv"), "--out", path("m.json")});
  ASSERT_EQ(train.code, kOk) << train.err;
  EXPECT_EQ(train.doc().at("k_source"), "cv");
  EXPECT_EQ(train.doc().at("cv").size(), default_k_grid().size());
}

TEST_F(CliEndToEnd, CvReportIsDeterministicApartFromTiming) {
  ASSERT_EQ(invoke({"synth", "--kind", "circles", "--n", "150", "--out", path("c.csv")}).code,
            kOk);
  const std::vector<std::string> args{"cv", "--data", path("c.csv"), "--k-grid", "2,6,12",
                                      "--folds", "3", "--seed", "4"};
  json a = invoke(args).doc();
  json b = invoke(args).doc();
  EXPECT_EQ(a.at("per_k").size(), 3u);
  a.erase("timing");
  b.erase("timing");
  EXPECT_EQ(a, b);
}

TEST_F(CliEndToEnd, BenchReportsTimings) {
  ASSERT_EQ(invoke({"synth", "--kind", "moons", "--n", "100", "--out", path("m.csv")}).code, kOk);
  const auto bench = invoke({"bench", "--data", path("m.csv"), "--reps", "2", "--min-ms", "0"});
  ASSERT_EQ(bench.code, kOk) << bench.err;
  const json t = bench.doc().at("timing");
  EXPECT_EQ(t.at("train_time_ms").at("repetitions"), 2);
  EXPECT_GE(t.at("infer_time_ms").at("mean").get<double>(), 0.0);
  EXPECT_EQ(bench.doc().at("knn1_training_accuracy"), 1.0);
}

TEST_F(CliEndToEnd, ExitCodes) {
  EXPECT_EQ(invoke({"train", "--data", path("missing.csv"), "--out", path("m.json")}).code,
            kIoError);
  EXPECT_EQ(invoke({"train", "--data", "x"}).code, kUsage);

  testing::write_file(dir / "bad.csv", "a,b,label\n1,2,x\n3,oops,y\n");
  const auto bad = invoke({"train", "--data", path("bad.csv"), "--k", "2", "--out",
                           path("m.json")});
  EXPECT_EQ(bad.code, kDataError);
  EXPECT_NE(bad.err.find("row 3"), std::string::npos) << bad.err;

  testing::write_file(dir / "notmodel.json", "{\"format_version\": 9}");
  EXPECT_EQ(invoke({"evaluate", "--model", path("notmodel.json"), "--data", path("bad.csv")}).code,
            kModelFormat);

  ASSERT_EQ(invoke({"synth", "--kind", "moons", "--n", "60", "--out", path("m.csv")}).code, kOk);
  ASSERT_EQ(invoke({"train", "--data", path("m.csv"), "--k", "4", "--out", path("m.json")}).code,
            kOk);
  testing::write_file(dir / "three.csv", "a,b,c,label\n1,2,3,0\n4,5,6,1\n");
  const auto dim = invoke({"evaluate", "--model", path("m.json"), "--data", path("three.csv")});
  EXPECT_EQ(dim.code, kDimensionMismatch);
  EXPECT_NE(dim.err.find("2"), std::string::npos);

  testing::write_file(dir / "unknown.csv", "a,b,label\n1,2,7\n");
  EXPECT_EQ(invoke({"evaluate", "--model", path("m.json"), "--data", path("unknown.csv")}).code,
            kDataError);
}

}  // namespace
}  // namespace superk::cli
