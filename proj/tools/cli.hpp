#pragma once

// Command implementations behind the `urerf` executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "urerf/forest.hpp"
#include "urerf/geodesic_eval.hpp"
#include "urerf/synthdata.hpp"

namespace urerf::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidArgument = 2,
  kIoError = 3,
  kOracleMismatch = 4,
};

struct GenerateOptions {
  std::string dataset = "helix";
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::size_t noise_dims = 0;
  double noise_var = 70.0;
  bool rescale = false;
  std::filesystem::path out = "data.csv";
};

/// Generator output after noise and optional rescaling.
Dataset make_dataset(const GenerateOptions& opt);
void cmd_generate(const GenerateOptions& opt);

struct FitOptions {
  std::filesystem::path in;
  /// Writes <out>.forest.json and <out>.proximity.csv.
  std::filesystem::path out = "fit";
  ForestConfig forest;
  bool triplets = false;
};

std::filesystem::path forest_path(const std::filesystem::path& prefix);
std::filesystem::path proximity_path(const std::filesystem::path& prefix);
std::filesystem::path triplets_path(const std::filesystem::path& prefix);

/// Logs per-tree timing and the leaf-size histogram to `log`.
void cmd_fit(const FitOptions& opt, std::ostream& log);

struct EvalOptions {
  std::filesystem::path in;
  std::filesystem::path proximity;
  std::filesystem::path distance;
  std::vector<std::string> methods{"proximity", "euclidean"};
  std::vector<std::size_t> ks{50};
  std::filesystem::path out = "pr.csv";
};

struct PrRow {
  std::string method;
  PRPoint point;
  double chance = 0.0;
};

std::vector<PrRow> evaluate(const Dataset& dataset, const EvalOptions& opt);
void write_pr_csv(const std::vector<PrRow>& rows, std::ostream& out);
void cmd_eval(const EvalOptions& opt);

struct SweepOptions {
  std::vector<std::string> datasets{"linear", "helix", "sphere", "gmm"};
  /// noise-dims | minparent | mtry | criterion
  std::string param = "noise-dims";
  std::vector<std::string> values;
  GenerateOptions base;
  ForestConfig forest;
  std::vector<std::size_t> ks{50};
  bool timing = false;
  std::filesystem::path out = "sweep.csv";
};

/// Seed of one sweep cell, a function of the master seed, the swept
/// parameter, its value and the dataset.
std::uint64_t cell_seed(std::uint64_t master, const std::string& param, const std::string& value,
                        const std::string& dataset);

void cmd_sweep(const SweepOptions& opt, std::ostream& log);

/// Parses argv and runs a subcommand; returns a process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace urerf::cli
