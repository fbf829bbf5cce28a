#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "superk/eval.hpp"

namespace superk::cli {

// Process exit codes. Listed in the help text.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kDataError = 3,
  kDimensionMismatch = 4,
  kModelFormat = 5,
  kIoError = 6,
  kInvalidArgument = 7,
};

struct TrainCmd {
  std::string data;
  std::string label_col = "-1";
  std::optional<std::size_t> k;  // chosen by cross-validation when absent
  std::size_t em_cycles = 10;
  std::size_t correction_cycles = 50;
  std::string out;
  std::uint64_t seed = 0;
};

struct PredictCmd {
  std::string model;
  std::string data;
  std::string out;
};

struct EvaluateCmd {
  std::string model;
  std::string data;
  std::string label_col = "-1";
};

struct CvCmd {
  std::string data;
  std::string label_col = "-1";
  std::vector<std::size_t> k_grid;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

struct SynthCmd {
  std::string kind;
  std::size_t n = 400;
  std::optional<double> noise;  // 0.15 for moons, 0.05 for circles
  double factor = 0.5;
  int classes = 3;
  double spread = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct RasterCmd {
  std::string model;
  Bounds bounds;
  std::size_t resolution = 200;
  std::string out;
};

struct BenchCmd {
  std::string data;
  std::string label_col = "-1";
  std::size_t k = 10;
  std::size_t reps = 10;
  double min_ms = 1000.0;
};

struct HelpCmd {
  std::string text;
};

using Command =
    std::variant<TrainCmd, PredictCmd, EvaluateCmd, CvCmd, SynthCmd, RasterCmd, BenchCmd, HelpCmd>;

/// Raised by parse_args; the message names the offending flag or token.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// argv without the program name.
Command parse_args(const std::vector<std::string>& args);

/// Runs a parsed command. JSON results go to `out`, diagnostics to `err`.
int run(const Command& cmd, std::ostream& out, std::ostream& err);

/// parse_args + run with error mapping; the body of main().
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace superk::cli
