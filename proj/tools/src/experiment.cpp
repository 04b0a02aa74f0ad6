#include "kbudget/tools/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "kbudget/errors.hpp"
#include "kbudget/kkmc.hpp"
#include "kbudget/krr.hpp"
#include "kbudget/mog.hpp"
#include "kbudget/tools/serialization.hpp"

namespace kbudget::tools {
namespace {

using nlohmann::json;

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::krr_closed_form, "krr-closed-form"},
    {ExperimentKind::krr_classify, "krr-classify"},
    {ExperimentKind::krr_indicator, "krr-indicator"},
    {ExperimentKind::d_eff_scan, "d-eff-scan"},
    {ExperimentKind::kkmc_cost_envelope, "kkmc-cost-envelope"},
    {ExperimentKind::kkmc_recover, "kkmc-recover"},
    {ExperimentKind::rank_gap, "rank-gap"},
    {ExperimentKind::mog_pipeline, "mog-pipeline"},
    {ExperimentKind::budget_curve, "budget-curve"},
};

InstanceType instance_type_for(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kkmc_cost_envelope:
    case ExperimentKind::kkmc_recover:
      return InstanceType::kkmc;
    case ExperimentKind::rank_gap:
      return InstanceType::rank;
    case ExperimentKind::mog_pipeline:
      return InstanceType::mog;
    default:
      return InstanceType::krr;
  }
}

std::string budget_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  throw UsageError("budget must be a number or an expression string");
}

void validate(const ExperimentConfig& c) {
  const InstanceParams& p = c.instance;
  if (p.type != instance_type_for(c.kind)) {
    throw UsageError(to_string(c.kind) + " needs a " + to_string(instance_type_for(c.kind)) +
                     " instance, got " + to_string(p.type));
  }
  if (p.n == 0) throw UsageError("instance.n must be positive");
  switch (p.type) {
    case InstanceType::krr:
      if (p.k_or_J < 4 || p.k_or_J % 4 != 0) {
        throw UsageError("instance.J must be a positive multiple of 4");
      }
      if (!(p.epsilon > 0.0 && p.epsilon < 0.5)) {
        throw UsageError("instance.epsilon must lie in (0, 1/2)");
      }
      break;
    case InstanceType::kkmc:
      if (p.k_or_J == 0) throw UsageError("instance.k must be positive");
      try {
        block_width_of(p.epsilon);
      } catch (const ContractViolation& e) {
        throw UsageError(std::string("instance.epsilon: ") + e.what());
      }
      break;
    case InstanceType::rank:
      if (p.k_or_J == 0 || p.n <= p.k_or_J) throw UsageError("rank instance needs n > k >= 1");
      break;
    case InstanceType::mog:
      if (p.k_or_J == 0 || p.d == 0) throw UsageError("instance.k and instance.d must be positive");
      if (!(p.sigma > 0.0) || !(p.epsilon > 0.0)) {
        throw UsageError("instance.sigma and instance.epsilon must be positive");
      }
      break;
  }
  if (c.kind == ExperimentKind::krr_indicator && !(c.options.c1 > c.options.c0)) {
    throw UsageError("options.c1 must exceed options.c0");
  }
  if (c.kind == ExperimentKind::budget_curve && c.budgets.empty()) {
    throw UsageError("budget-curve needs a non-empty budgets list");
  }
  if (c.seeds.empty()) throw UsageError("config needs seeds or trials");
  // Surface expression errors before any trial runs.
  const BudgetVariables vars = budget_variables(c);
  try {
    if (c.budget) budget_from_expr(*c.budget, vars);
    for (const auto& b : c.budgets) budget_from_expr(b, vars);
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
}

MogConfig mog_config(const ExperimentConfig& c, std::uint64_t seed) {
  MogConfig m;
  m.k = c.instance.k_or_J;
  m.epsilon = c.instance.epsilon;
  m.sigma = c.instance.sigma;
  m.d = c.instance.d;
  m.c_sketch = c.options.c_sketch;
  m.delta_exponent = c.options.delta_exponent;
  m.seed = seed;
  return m;
}

class RowSink {
 public:
  RowSink(const ExperimentConfig& c, std::uint64_t seed, double k)
      : kind_(to_string(c.kind)), seed_(seed), n_(c.instance.n), k_(k), eps_(c.instance.epsilon) {}

  void emit(const std::string& metric, double value, const QueryReport& report) {
    rows.push_back(ResultRow{kind_, seed_, n_, k_, eps_, metric, value, report.distinct_entries,
                             report.total_requests, report.budget, report.budget_exhausted});
  }

  std::vector<ResultRow> rows;

 private:
  std::string kind_;
  std::uint64_t seed_;
  std::size_t n_;
  double k_;
  double eps_;
};

std::optional<std::uint64_t> resolve_budget(const ExperimentConfig& c) {
  if (!c.budget) return std::nullopt;
  return budget_from_expr(*c.budget, budget_variables(c));
}

KrrInstance make_krr(const ExperimentConfig& c, std::uint64_t seed, KernelSpec spec) {
  KrrParams p;
  p.n = c.instance.n;
  p.J = c.instance.k_or_J;
  p.epsilon = c.instance.epsilon;
  p.augmented = c.instance.augmented;
  p.spec = spec;
  p.seed = seed;
  return gen_krr(p);
}

double classification_accuracy(const KrrInstance& inst, const Eigen::VectorXd& alpha) {
  const auto labels = classify_rows(alpha.head(static_cast<Eigen::Index>(inst.n)),
                                    static_cast<double>(inst.n), inst.k, inst.epsilon);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < inst.n; ++i) correct += labels[i] == inst.classes[i];
  return static_cast<double>(correct) / static_cast<double>(inst.n);
}

// Nystrom path: reads as many whole columns as the oracle's budget allows.
double budgeted_accuracy(KrrInstance& inst, std::uint64_t seed, std::size_t* columns) {
  CounterRng rng(seed, streams::kAlgorithm);
  const SpectralApprox approx = nystrom_uniform(inst.gram, inst.total_points(), rng);
  if (columns) *columns = approx.columns_read;
  const KrrSolution sol = approx_solve_spectral(approx, inst.z, inst.lambda);
  return classification_accuracy(inst, sol.alpha);
}

void trial_krr_closed_form(const ExperimentConfig& c, std::uint64_t seed, RowSink& out) {
  KrrInstance inst = make_krr(c, seed, KernelSpec::linear());
  if (const auto b = resolve_budget(c)) inst.gram = inst.gram.fresh(b);
  const Eigen::MatrixXd k = reveal_all(inst.gram);
  const KrrSolution sol = solve_exact(k, inst.z, inst.lambda);
  const Eigen::VectorXd opt = hard_instance_opt(inst);
  const double max_diff = (sol.alpha - opt).cwiseAbs().maxCoeff();
  const double scale = static_cast<double>(inst.n) / inst.k;
  double gap_s1 = 0.0;
  double gap_s2 = 0.0;
  for (std::size_t i = 0; i < inst.n; ++i) {
    const double scaled = scale * sol.alpha(static_cast<Eigen::Index>(i));
    if (inst.classes[i] == KrrClass::s1) {
      gap_s1 = std::max(gap_s1, std::abs(scaled - 1.0 / (1.0 + inst.epsilon)));
    } else {
      gap_s2 = std::max(gap_s2, std::abs(scaled - 1.0 / (1.0 + 2.0 * inst.epsilon)));
    }
  }
  const QueryReport r = inst.gram.report();
  out.emit("max_abs_diff", max_diff, r);
  out.emit("max_scaled_gap_s1", gap_s1, r);
  out.emit("max_scaled_gap_s2", gap_s2, r);
  const double tol = 0.12 * inst.epsilon;
  out.emit("trial_ok", max_diff <= 1e-9 && gap_s1 <= tol && gap_s2 <= tol, r);
}

void trial_krr_classify(const ExperimentConfig& c, std::uint64_t seed, RowSink& out) {
  KrrInstance inst = make_krr(c, seed, KernelSpec::linear());
  double accuracy = 0.0;
  if (const auto b = resolve_budget(c)) {
    inst.gram = inst.gram.fresh(b);
    std::size_t columns = 0;
    accuracy = budgeted_accuracy(inst, seed, &columns);
    out.emit("columns_read", static_cast<double>(columns), inst.gram.report());
  } else {
    const Eigen::MatrixXd k = reveal_all(inst.gram);
    accuracy = classification_accuracy(inst, solve_exact(k, inst.z, inst.lambda).alpha);
  }
  const QueryReport r = inst.gram.report();
  out.emit("accuracy", accuracy, r);
  out.emit("trial_ok", accuracy >= 0.9, r);
}

void trial_budget_curve(const ExperimentConfig& c, std::uint64_t seed, RowSink& out) {
  KrrInstance inst = make_krr(c, seed, KernelSpec::linear());
  const BudgetVariables vars = budget_variables(c);
  for (const auto& expr : c.budgets) {
    inst.gram = inst.gram.fresh(budget_from_expr(expr, vars));
    std::size_t columns = 0;
    const double accuracy = budgeted_accuracy(inst, seed, &columns);
    const QueryReport r = inst.gram.report();
    out.emit("columns_read", static_cast<double>(columns), r);
    out.emit("accuracy", accuracy, r);
    out.emit("trial_ok", accuracy >= 0.9, r);
  }
}

void trial_krr_indicator(const ExperimentConfig& c, std::uint64_t seed, RowSink& out) {
  const double c0 = c.options.c0;
  const double c1 = c.options.c1;
  KrrInstance inst = make_krr(c, seed, KernelSpec::indicator(c0, c1));
  if (const auto b = resolve_budget(c)) inst.gram = inst.gram.fresh(b);
  const Eigen::MatrixXd k = reveal_all(inst.gram);
  const Eigen::MatrixXd g = (k.array() - c0) / (c1 - c0);
  const KrrSolution fast = indicator_solve(g, inst.z, inst.lambda, c0, c1);
  const KrrSolution direct = solve_exact(k, inst.z, inst.lambda);
  const double diff = (fast.alpha - direct.alpha).cwiseAbs().maxCoeff();
  const double diff_opt = (fast.alpha - hard_instance_opt(inst)).cwiseAbs().maxCoeff();
  const QueryReport r = inst.gram.report();
  out.emit("max_abs_diff", diff, r);
  out.emit("max_abs_diff_closed_form", diff_opt, r);
  out.emit("trial_ok", diff <= 1e-9 && diff_opt <= 1e-9, r);
}

void trial_d_eff(const ExperimentConfig& c, std::uint64_t seed, RowSink& out) {
  KrrInstance inst = make_krr(c, seed, KernelSpec::linear());
  if (const auto b = resolve_budget(c)) inst.gram = inst.gram.fresh(b);
  const Eigen::MatrixXd k = reveal_all(inst.gram);
  const double measured = d_eff_from_gram(k, inst.lambda);
  std::vector<double> eigen(inst.counts.begin(), inst.counts.end());
  const double from_counts = d_eff(eigen, inst.lambda);
  const double eps = inst.epsilon;
  const double target = inst.k / 2.0 * (1.0 / (1.0 + eps) + 1.0 / (1.0 + 2.0 * eps));
  const double rel = (measured - target) / target;
  const QueryReport r = inst.gram.report();
  out.emit("d_eff", measured, r);
  out.emit("d_eff_counts", from_counts, r);
  out.emit("d_eff_target", target, r);
  out.emit("relative_error", rel, r);
  out.emit("trial_ok", std::abs(rel) <= 0.05, r);
}

void trial_kkmc_envelope(const ExperimentConfig& c, std::uint64_t seed, RowSink& out) {
  KkmcInstance inst = gen_kkmc(c.instance.n, c.instance.k_or_J, c.instance.epsilon, seed);
  // Verification against ground-truth coordinates; no oracle reads.
  const CostBreakdown cost = cost_explicit(inst.gram.hidden_points(), block_clustering(inst));
  const double n = static_cast<double>(inst.n);
  const double lower = n * large_cluster_bound(inst.epsilon);
  const double upper = n * (1.0 - (79.0 / 40.0) * inst.epsilon);
  const QueryReport r = inst.gram.report();
  out.emit("cost", cost.total, r);
  out.emit("per_point_cost", cost.total / n, r);
  out.emit("envelope_lower", lower, r);
  out.emit("envelope_upper", upper, r);
  out.emit("trial_ok", cost.total >= lower && cost.total <= upper, r);
}

void trial_kkmc_recover(const ExperimentConfig& c, std::uint64_t seed, RowSink& out) {
  KkmcInstance inst = gen_kkmc(c.instance.n, c.instance.k_or_J, c.instance.epsilon, seed);
  if (const auto b = resolve_budget(c)) inst.gram = inst.gram.fresh(b);
  std::vector<std::optional<std::size_t>> known(inst.n);
  for (std::size_t i = 0; i < inst.n / 2; ++i) known[i] = inst.blocks[i];
  const LabelRecovery rec = recover_labels(inst.gram, block_clustering(inst), known,
                                           inst.epsilon, seed, {c.options.recover_c});
  std::size_t correct = 0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < inst.n; ++i) {
    if (known[i] || !rec.labels[i]) continue;
    (*rec.labels[i] == inst.blocks[i] ? correct : wrong) += 1;
  }
  const double fraction = rec.unlabeled ? static_cast<double>(correct) / rec.unlabeled : 0.0;
  const QueryReport r = inst.gram.report();
  const double ledger_cap = c.options.recover_c * static_cast<double>(inst.n) / inst.epsilon;
  out.emit("recovered_fraction", fraction, r);
  out.emit("wrong_labels", static_cast<double>(wrong), r);
  out.emit("samples_drawn", static_cast<double>(rec.samples_drawn), r);
  out.emit("trial_ok",
           fraction >= 1.0 / 6.0 && static_cast<double>(r.distinct_entries) <= ledger_cap, r);
}

void trial_rank_gap(const ExperimentConfig& c, std::uint64_t seed, RowSink& out) {
  RankInstance inst = gen_rank(c.instance.n, c.instance.k_or_J, seed);
  double gap = 0.0;
  try {
    gap = rank_cost_gap(inst);
  } catch (const DegenerateInstance& e) {
    throw StageError("rank_cost_gap", e.what());
  }
  const QueryReport r = inst.gram.report();
  out.emit("planted", inst.planted ? 1.0 : 0.0, r);
  out.emit("cost_gap", gap, r);
  out.emit("trial_ok", inst.planted ? gap > 0.0 : gap == 0.0, r);
}

void trial_mog(const ExperimentConfig& c, std::uint64_t seed, RowSink& out, json* artifact) {
  const MogConfig cfg = mog_config(c, seed);
  MogParams p;
  p.n = c.instance.n;
  p.d = c.instance.d;
  p.k = c.instance.k_or_J;
  p.sigma = c.instance.sigma;
  p.separation =
      c.instance.separation > 0.0 ? c.instance.separation : pipeline_separation(p.n, cfg);
  p.seed = seed;
  MogInstance inst = gen_mog(p);
  if (const auto b = resolve_budget(c)) inst.gram = inst.gram.fresh(b);
  const MogResult res = cluster_mog(inst.gram, cfg, inst.labels);
  const PointMatrix& x = inst.gram.hidden_points();
  const CostBreakdown cost = cost_explicit(x, res.clustering);
  const CostBreakdown truth = cost_explicit(x, Clustering(inst.labels));
  const double ratio = cost.total / truth.total;
  const auto closed_form = pipeline_query_count(inst.n, res.t, res.m);
  const QueryReport& r = res.report;
  out.emit("cost_ratio", ratio, r);
  out.emit("separation", p.separation, r);
  out.emit("t", static_cast<double>(res.t), r);
  out.emit("m", static_cast<double>(res.m), r);
  out.emit("closed_form_queries", static_cast<double>(closed_form), r);
  out.emit("query_count_match", r.distinct_entries == closed_form ? 1.0 : 0.0, r);
  out.emit("fallbacks", static_cast<double>(res.fallbacks), r);
  out.emit("trial_ok", ratio <= 1.0 + 8.0 * c.instance.epsilon, r);
  if (artifact) {
    *artifact = mog_result_json(res, cost);
    (*artifact)["seed"] = seed;
    (*artifact)["config"] = cfg;
  }
}

double row_k(const ExperimentConfig& c) {
  if (c.instance.type == InstanceType::krr) {
    return c.instance.epsilon * static_cast<double>(c.instance.k_or_J);
  }
  return static_cast<double>(c.instance.k_or_J);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw UsageError("unknown experiment kind '" + name + "'");
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    c.source = j;
    c.kind = experiment_kind_from_string(j.at("experiment").get<std::string>());
    json inst = j.at("instance");
    if (!inst.contains("type")) inst["type"] = kbudget::to_string(instance_type_for(c.kind));
    c.instance = inst.get<InstanceParams>();
    if (j.contains("seeds")) {
      c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else if (j.contains("trials")) {
      const auto trials = j.at("trials").get<std::uint64_t>();
      for (std::uint64_t s = 1; s <= trials; ++s) c.seeds.push_back(s);
    }
    if (j.contains("budget") && !j.at("budget").is_null()) c.budget = budget_string(j.at("budget"));
    if (j.contains("budgets")) {
      for (const auto& b : j.at("budgets")) c.budgets.push_back(budget_string(b));
    }
    c.output = j.value("output", c.output);
    if (j.contains("options")) {
      const json& o = j.at("options");
      c.options.c0 = o.value("c0", c.options.c0);
      c.options.c1 = o.value("c1", c.options.c1);
      c.options.recover_c = o.value("recover_c", c.options.recover_c);
      c.options.c_sketch = o.value("C_sketch", c.options.c_sketch);
      c.options.delta_exponent = o.value("delta_exponent", c.options.delta_exponent);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const ContractViolation& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

json load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(load_config_json(path));
}

BudgetVariables budget_variables(const ExperimentConfig& c) {
  BudgetVariables v;
  const InstanceParams& p = c.instance;
  v["n"] = static_cast<double>(p.n);
  v["eps"] = p.epsilon;
  v["k"] = row_k(c);
  if (p.type == InstanceType::krr) v["J"] = static_cast<double>(p.k_or_J);
  if (p.type == InstanceType::mog) {
    const MogConfig cfg = mog_config(c, 0);
    v["m"] = static_cast<double>(sketch_dimension(p.n, cfg));
    v["t"] = static_cast<double>(bootstrap_size(p.n, cfg));
  }
  return v;
}

std::vector<ResultRow> run_trial(const ExperimentConfig& c, std::uint64_t seed, json* artifact) {
  RowSink out(c, seed, row_k(c));
  switch (c.kind) {
    case ExperimentKind::krr_closed_form:
      trial_krr_closed_form(c, seed, out);
      break;
    case ExperimentKind::krr_classify:
      trial_krr_classify(c, seed, out);
      break;
    case ExperimentKind::krr_indicator:
      trial_krr_indicator(c, seed, out);
      break;
    case ExperimentKind::d_eff_scan:
      trial_d_eff(c, seed, out);
      break;
    case ExperimentKind::kkmc_cost_envelope:
      trial_kkmc_envelope(c, seed, out);
      break;
    case ExperimentKind::kkmc_recover:
      trial_kkmc_recover(c, seed, out);
      break;
    case ExperimentKind::rank_gap:
      trial_rank_gap(c, seed, out);
      break;
    case ExperimentKind::mog_pipeline:
      trial_mog(c, seed, out, artifact);
      break;
    case ExperimentKind::budget_curve:
      trial_budget_curve(c, seed, out);
      break;
  }
  return std::move(out.rows);
}

RunResult run(const ExperimentConfig& config, std::size_t threads) {
  const std::size_t count = config.seeds.size();
  struct Slot {
    std::vector<ResultRow> rows;
    std::optional<TrialError> error;
    json artifact;
  };
  std::vector<Slot> slots(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      const std::uint64_t seed = config.seeds[i];
      try {
        slots[i].rows = run_trial(config, seed, &slots[i].artifact);
      } catch (const StageError& e) {
        slots[i].error = TrialError{seed, e.stage(), e.what()};
      } catch (const BudgetExhausted& e) {
        slots[i].error = TrialError{seed, "oracle", e.what()};
      } catch (const std::exception& e) {
        slots[i].error = TrialError{seed, to_string(config.kind), e.what()};
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return config.seeds[a] < config.seeds[b]; });
  RunResult result;
  for (const std::size_t i : order) {
    auto& s = slots[i];
    result.rows.insert(result.rows.end(), s.rows.begin(), s.rows.end());
    if (s.error) result.errors.push_back(*s.error);
    if (!s.artifact.is_null()) result.trials.push_back(std::move(s.artifact));
  }
  return result;
}

std::size_t thread_count_from_env() {
  if (const char* env = std::getenv("KB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.seed << ',' << r.n << ',' << format_double(r.k) << ','
        << format_double(r.epsilon) << ',' << r.metric << ',' << format_double(r.value) << ','
        << r.distinct_entries << ',' << r.total_requests << ','
        << (r.budget ? std::to_string(*r.budget) : std::string()) << ','
        << (r.budget_exhausted ? "true" : "false") << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw UsageError("results.csv: missing or unexpected header");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11) {
      throw UsageError("results.csv line " + std::to_string(line_no) + ": expected 11 fields");
    }
    try {
      ResultRow r;
      r.experiment = f[0];
      r.seed = std::stoull(f[1]);
      r.n = std::stoull(f[2]);
      r.k = std::stod(f[3]);
      r.epsilon = std::stod(f[4]);
      r.metric = f[5];
      r.value = std::stod(f[6]);
      r.distinct_entries = std::stoull(f[7]);
      r.total_requests = std::stoull(f[8]);
      if (!f[9].empty()) r.budget = std::stoull(f[9]);
      r.budget_exhausted = f[10] == "true";
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw UsageError("results.csv line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                       const RunResult& result, std::size_t threads) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  {
    auto out = open_for_write(dir / "results.csv");
    write_csv(out, result.rows);
    if (!out) throw IoError("write failed: " + (dir / "results.csv").string());
  }

  json errors = json::array();
  for (const auto& e : result.errors) {
    errors.push_back({{"seed", e.seed}, {"stage", e.stage}, {"message", e.message}});
  }
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"experiment", r.experiment},
                    {"seed", r.seed},
                    {"n", r.n},
                    {"k", r.k},
                    {"epsilon", r.epsilon},
                    {"metric", r.metric},
                    {"value", r.value},
                    {"query_report",
                     {{"distinct_entries", r.distinct_entries},
                      {"total_requests", r.total_requests},
                      {"budget", r.budget ? json(*r.budget) : json(nullptr)},
                      {"budget_exhausted", r.budget_exhausted}}}});
  }
  {
    auto out = open_for_write(dir / "results.json");
    out << json{{"rows", rows}, {"errors", errors}, {"trials", result.trials}}.dump(2) << '\n';
  }
  {
    auto out = open_for_write(dir / "manifest.json");
    const json manifest{{"tool", "kernel-budget"},
                        {"version", "0.1.0"},
                        {"created_utc", utc_timestamp()},
                        {"config", config.source},
                        {"experiment", to_string(config.kind)},
                        {"seeds", config.seeds},
                        {"threads", threads},
                        {"rows", result.rows.size()},
                        {"errors", errors},
                        {"compiler", __VERSION__},
                        {"eigen",
                         std::to_string(EIGEN_WORLD_VERSION) + "." +
                             std::to_string(EIGEN_MAJOR_VERSION) + "." +
                             std::to_string(EIGEN_MINOR_VERSION)}};
    out << manifest.dump(2) << '\n';
  }
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw UsageError("report: no result rows");
  using Key = std::tuple<std::string, std::string, std::optional<std::uint64_t>>;
  std::map<Key, std::vector<double>> groups;
  std::vector<Key> order;
  std::map<std::pair<std::string, std::optional<std::uint64_t>>, std::pair<double, std::size_t>>
      success;
  for (const auto& r : rows) {
    Key key{r.experiment, r.metric, r.budget};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.value);
    if (r.metric == "trial_ok") {
      auto& s = success[{r.experiment, r.budget}];
      s.first += r.value;
      s.second += 1;
    }
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& v = groups[key];
    SummaryRow s;
    std::tie(s.experiment, s.metric, s.budget) = key;
    s.count = v.size();
    double sum = 0.0;
    for (const double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) /
                                         static_cast<double>(v.size()))
                             : 0.0;
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    if (const auto it = success.find({s.experiment, s.budget}); it != success.end()) {
      s.success_fraction = it->second.first / static_cast<double>(it->second.second);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& s : rows) {
    out << s.experiment << ',' << s.metric << ','
        << (s.budget ? std::to_string(*s.budget) : std::string()) << ',' << s.count << ','
        << format_double(s.mean) << ',' << format_double(s.stderr_) << ','
        << format_double(s.min) << ',' << format_double(s.max) << ','
        << (s.success_fraction ? format_double(*s.success_fraction) : std::string()) << '\n';
  }
}

void write_report(const std::filesystem::path& dir) {
  const auto csv_path = dir / "results.csv";
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot read " + csv_path.string());
  const auto summary = summarize(read_csv(in));
  {
    auto out = open_for_write(dir / "summary.csv");
    write_summary_csv(out, summary);
  }
  json run_manifest = nullptr;
  if (std::ifstream m(dir / "manifest.json"); m) {
    try {
      m >> run_manifest;
    } catch (const json::exception&) {
      run_manifest = nullptr;
    }
  }
  json groups = json::array();
  for (const auto& s : summary) {
    groups.push_back({{"experiment", s.experiment},
                      {"metric", s.metric},
                      {"budget", s.budget ? json(*s.budget) : json(nullptr)},
                      {"count", s.count},
                      {"mean", s.mean},
                      {"stderr", s.stderr_},
                      {"min", s.min},
                      {"max", s.max},
                      {"success_fraction",
                       s.success_fraction ? json(*s.success_fraction) : json(nullptr)}});
  }
  auto out = open_for_write(dir / "summary.json");
  out << json{{"tool", "kernel-budget"},
              {"version", "0.1.0"},
              {"created_utc", utc_timestamp()},
              {"run_manifest", run_manifest},
              {"summary", groups}}
             .dump(2)
      << '\n';
}

}  // namespace kbudget::tools
