#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfp/benchmarks.hpp"
#include "lfp/schedulers.hpp"

namespace lfp::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitInvariant = 3 };

/// Marginal of E_z[f] written at the final output.
struct HistogramOutput {
  bool enabled = false;
  std::size_t bins = 100;
  double half_width = 4.0;
  int axis = 0;
};

/// A run file: simulation settings, initial condition and output options.
struct RunConfig {
  std::string preset;  // empty if the file does not start from a preset
  SimConfig sim;
  InitialCondition initial;
  /// Deterministic runs sample the initial condition at this z.
  double z = 0.5;
  HistogramOutput histogram;
  std::string output_dir = "out";
};

std::vector<std::string> preset_names();
/// Full config document of a preset. Throws ConfigError for an unknown name.
nlohmann::json preset(const std::string& name);

/// Applies the preset named in the document (if any), then the document's own keys on top.
/// Unknown keys, wrong types and out-of-range values throw ConfigError naming the offending path.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads a file, or a preset when `source` names one and no such file exists.
RunConfig load_config(const std::string& source);
/// Complete document that parse_config maps back to the same RunConfig.
nlohmann::json to_json(const RunConfig& cfg);

/// Seed of the initial draw, derived from the run seed.
std::uint64_t initial_seed(std::uint64_t seed) noexcept;

/// RFC 4180 writer: CRLF line ends, fields quoted when they contain a comma, quote or line break.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  CsvWriter& field(const std::string& s);
  CsvWriter& field(double x);
  CsvWriter& field(long long x);
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

/// Column names of the per-node and aggregated series files; `time` comes first.
const std::vector<std::string>& series_columns();
void write_node_series(std::ostream& out, const ObservableSeries& s, std::size_t node);
/// E_z or Var_z of every column, by the node weights of the series.
void write_z_series(std::ostream& out, const ObservableSeries& s, bool variance);

struct RunOptions {
  std::optional<std::filesystem::path> record_log;
  std::optional<std::filesystem::path> replay_log;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string message;
};

CommandResult cmd_run(const RunConfig& cfg, const RunOptions& opts, std::ostream& log);

struct SweepOptions {
  std::vector<int> orders{1, 2, 4, 8, 16};
  int reference_order = 30;
  std::vector<Surrogate> kernels;  // empty: the config's kernel
  RunOptions logs;
};
/// Reference at the reference order in Record mode, then every order replayed on that log; writes
/// sweep_m.csv with the L2_p error of T(z) at the final time.
CommandResult cmd_sweep_m(const RunConfig& cfg, const SweepOptions& opts, std::ostream& log);

struct CompareOptions {
  std::vector<int> orders{0, 1, 2, 4};
  std::vector<int> samples{1, 2, 4, 8, 16};
  int reference_nodes = 8;
  std::size_t reference_particles = 0;  // 0: ten times the config's particle count
};
/// E_z[M4] at the final time by sG and by Monte Carlo in z, against a collocation reference;
/// writes compare_mc.csv with the cost and error of each method.
CommandResult cmd_compare_mc(const RunConfig& cfg, const CompareOptions& opts, std::ostream& log);

/// Kernel property suite as a table; fails with kExitInvariant if a property does not hold.
CommandResult cmd_kernel_check(std::ostream& log);

/// Parses "1,2,4".
std::vector<int> parse_int_list(const std::string& text);

}  // namespace lfp::cli
