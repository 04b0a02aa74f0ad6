// kernel-budget: run query-metered kernel experiments and summarize them.
//
// Exit codes:
//   0  every trial completed
//   1  at least one trial failed (errors listed in manifest.json and on stderr)
//   2  usage error: bad arguments, invalid config, unknown experiment kind
//   3  I/O error: unreadable input or unwritable output path

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "kbudget/tools/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTrialFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

int do_run(const std::string& config_path, const std::string& budget, const std::string& out_dir) {
  using namespace kbudget::tools;
  nlohmann::json j = load_config_json(config_path);
  if (!budget.empty()) j["budget"] = budget;
  if (!out_dir.empty()) j["output"] = out_dir;
  const ExperimentConfig config = parse_config(j);
  const std::size_t threads = thread_count_from_env();
  const RunResult result = run(config, threads);
  write_run_outputs(config.output, config, result, threads);
  std::cout << "wrote " << result.rows.size() << " rows to "
            << (std::filesystem::path(config.output) / "results.csv").string() << '\n';
  for (const auto& e : result.errors) {
    std::cerr << "seed " << e.seed << " failed in " << e.stage << ": " << e.message << '\n';
  }
  return result.errors.empty() ? kExitOk : kExitTrialFailure;
}

int do_report(const std::string& in_dir) {
  kbudget::tools::write_report(in_dir);
  std::cout << "wrote " << (std::filesystem::path(in_dir) / "summary.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-metered kernel method experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string budget;
  std::string out_dir;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run_cmd->add_option("--budget", budget, "Oracle budget, e.g. 0.5*nJ/4 (overrides the config)");
  run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");

  std::string in_dir;
  auto* report_cmd = app.add_subcommand("report", "Summarize a run directory");
  report_cmd->add_option("--in", in_dir, "Directory written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return do_run(config_path, budget, out_dir);
    return do_report(in_dir);
  } catch (const kbudget::tools::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const kbudget::tools::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTrialFailure;
  }
}
