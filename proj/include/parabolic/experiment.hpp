#pragma once
// Declarative experiments: a YAML config names a problem, a solver setup and
// a list of checks; run_experiment builds the problem, solves it, executes the
// checks and writes series.csv, report.json and config.resolved.yaml.
//
// Config blocks that select a stock component ("kind: ...") carry a flat
// parameter list whose keys, types and defaults come from a per-kind schema.
// Emission is canonical: fixed key order, every default spelled out, numbers
// in shortest round-trip form, so emit(parse(emit(c))) == emit(c).
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "parabolic/evolution.hpp"
#include "parabolic/problem.hpp"

namespace parabolic {

inline constexpr int kSchemaVersion = 1;

using ParamValue = std::variant<double, bool, std::string, std::vector<double>>;

/// A stock component choice with its resolved parameters in schema order.
struct KindBlock {
  std::string kind;
  std::vector<std::pair<std::string, ParamValue>> params;

  double number(std::string_view key) const;
  bool flag(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  const std::vector<double>& list(std::string_view key) const;
  std::vector<int> integers(std::string_view key) const;

  bool operator==(const KindBlock&) const = default;
};

struct ScheduleConfig {
  std::string spacing = "log";
  int count = 32;
  double first = 0.0;
  double last = 0.0;

  bool operator==(const ScheduleConfig&) const = default;
};

struct CheckConfig {
  /// 0 when the check belongs to no acceptance criterion.
  int criterion = 0;
  KindBlock block;

  bool operator==(const CheckConfig&) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  std::uint64_t seed = 0;

  int dim = 1;
  int points = 64;
  double length = 0.0;
  KindBlock diffusion;
  KindBlock forcing;
  KindBlock initial;

  std::string method = "split";
  double safety = 1.0;
  double horizon = 1.0;
  ScheduleConfig schedule;

  std::vector<CheckConfig> checks;

  /// Relative to the output root unless absolute.
  std::string output_dir;
  std::vector<std::string> formats{"csv", "json"};
  /// Highest order k in the norm series and the energy functional.
  int max_order = 3;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ParseError (line/column) for malformed YAML and ValidationError
/// (dotted field path) for unknown keys, wrong types or violated constraints.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical YAML.
std::string emit_config(const ExperimentConfig& config);
/// Re-validates a config assembled in code; throws ValidationError.
void validate_config(const ExperimentConfig& config);
/// A check of the given kind with every parameter at its default.
/// Throws ValidationError for an unknown kind.
CheckConfig default_check(std::string_view kind, int dim = 1);
/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

Method parse_method(std::string_view name);
std::vector<double> sample_times(const ExperimentConfig& config);
ProblemSpec build_problem(const ExperimentConfig& config);
/// Same experiment with N doubled and the safety factor halved.
ExperimentConfig refined(const ExperimentConfig& config);

struct CheckVerdict {
  std::string kind;
  int criterion = 0;
  bool passed = false;
  std::string summary;
  nlohmann::ordered_json metrics;
};

struct RunReport {
  std::string name;
  std::string config_hash;
  std::uint64_t seed = 0;
  bool passed = false;
  /// Set when the run stopped before all checks executed.
  bool partial = false;
  std::string error;
  std::size_t requested_checks = 0;
  std::size_t executed_checks = 0;
  std::vector<CheckVerdict> checks;
  IntegratorStats stats;
  double wall_seconds = 0.0;
  std::filesystem::path directory;
  /// Files written, relative to directory.
  std::vector<std::string> files;

  nlohmann::ordered_json to_json() const;
};

struct RunOptions {
  std::filesystem::path output_root = "lab-out";
  bool write_files = true;
};

/// Throws ValidationError for an invalid config before any compute and
/// propagates module errors from the main solve after writing a partial
/// report. Errors inside a single check fail that check only.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes text to path through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, std::string_view text);

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

// Bundled configs and the verification suites built from them.

struct BundledConfig {
  std::string_view name;
  std::string_view text;
};
std::span<const BundledConfig> bundled_configs();
ExperimentConfig bundled_config(std::string_view name);

std::span<const std::string_view> suite_names();
/// Criteria covered by a suite; throws Error(UnknownSuite) listing valid names.
std::vector<int> suite_criteria(std::string_view suite);

struct CriterionVerdict {
  int criterion = 0;
  bool passed = false;
  std::string summary;
};

struct SuiteReport {
  std::string suite;
  std::vector<CriterionVerdict> criteria;
  std::vector<RunReport> runs;
  bool passed() const;
};

struct SuiteOptions {
  RunOptions run;
  int threads = 1;
  /// Overrides every bundled seed when set.
  std::optional<std::uint64_t> seed;
};

/// Runs every bundled config that carries checks for the suite's criteria,
/// keeping only those checks, and folds the verdicts per criterion.
SuiteReport verify_suite(std::string_view suite, const SuiteOptions& options = {});

}  // namespace parabolic
