#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kbudget/instances.hpp"
#include "kbudget/tools/budget_expr.hpp"

namespace kbudget::tools {

/// Bad command line, bad config, or unusable input. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input or output path could not be read or written. Exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  krr_closed_form,
  krr_classify,
  krr_indicator,
  d_eff_scan,
  kkmc_cost_envelope,
  kkmc_recover,
  rank_gap,
  mog_pipeline,
  budget_curve,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ExperimentOptions {
  double c0 = 0.5;
  double c1 = 2.0;
  double recover_c = 160.0;
  double c_sketch = 8.0;
  double delta_exponent = 3.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::krr_closed_form;
  InstanceParams instance;
  std::vector<std::uint64_t> seeds;
  /// Oracle budget as an expression over n, k, J, eps, m, t.
  std::optional<std::string> budget;
  /// Budget grid for budget-curve.
  std::vector<std::string> budgets;
  std::string output = "out";
  ExperimentOptions options;
  /// The config as loaded, echoed into the manifest.
  nlohmann::json source;
};

/// Validates kind-specific parameters; throws UsageError.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Reads a config file as JSON; IoError if unreadable, UsageError if malformed.
nlohmann::json load_config_json(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Variables available to budget expressions for this config.
BudgetVariables budget_variables(const ExperimentConfig& config);

struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double k = 0.0;
  double epsilon = 0.0;
  std::string metric;
  double value = 0.0;
  std::uint64_t distinct_entries = 0;
  std::uint64_t total_requests = 0;
  std::optional<std::uint64_t> budget;
  bool budget_exhausted = false;
};

struct TrialError {
  std::uint64_t seed = 0;
  std::string stage;
  std::string message;
};

struct RunResult {
  std::vector<ResultRow> rows;
  std::vector<TrialError> errors;
  /// Per-trial structured output (mog-pipeline), keyed by seed.
  nlohmann::json trials = nlohmann::json::array();
};

/// Runs every seed, `threads` trials at a time. Rows are ordered by seed
/// (then emission order) whatever the completion order.
RunResult run(const ExperimentConfig& config, std::size_t threads);

/// Runs a single trial; throws on failure.
std::vector<ResultRow> run_trial(const ExperimentConfig& config, std::uint64_t seed,
                                 nlohmann::json* artifact = nullptr);

/// KB_THREADS if set to a positive integer, else the hardware concurrency.
std::size_t thread_count_from_env();

inline constexpr const char* kCsvHeader =
    "experiment,seed,n,k,epsilon,metric,value,distinct_entries,total_requests,budget,"
    "budget_exhausted";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws UsageError on a malformed file.
std::vector<ResultRow> read_csv(std::istream& in);

/// results.csv, results.json, manifest.json under `dir`.
void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                       const RunResult& result, std::size_t threads);

struct SummaryRow {
  std::string experiment;
  std::string metric;
  std::optional<std::uint64_t> budget;
  std::size_t count = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// Mean of the trial_ok metric in the same (experiment, budget) group.
  std::optional<double> success_fraction;
};

inline constexpr const char* kSummaryHeader =
    "experiment,metric,budget,count,mean,stderr,min,max,success_fraction";

/// Aggregates per (experiment, metric, budget); throws UsageError on no rows.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Reads `dir`/results.csv and writes summary.csv and summary.json next to it.
void write_report(const std::filesystem::path& dir);

/// printf("%.17g") for stable, round-trippable CSV numbers.
std::string format_double(double v);

}  // namespace kbudget::tools
