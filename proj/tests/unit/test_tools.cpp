#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kbudget/tools/budget_expr.hpp"
#include "kbudget/tools/experiment.hpp"
#include "kbudget/tools/serialization.hpp"

using namespace kbudget;
using namespace kbudget::tools;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kbudget_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json closed_form_config() {
  return json{{"experiment", "krr-closed-form"},
              {"instance", {{"n", 120}, {"J", 20}, {"epsilon", 0.1}}},
              {"seeds", {1, 2, 3, 4}}};
}

}  // namespace

TEST_CASE("budget expressions") {
  const BudgetVariables v{{"n", 1000}, {"J", 100}, {"k", 10}, {"eps", 0.1}};
  CHECK(eval_budget_expr("0.5*nJ/4", v) == doctest::Approx(12500.0));
  CHECK(eval_budget_expr("n*J", v) == doctest::Approx(100000.0));
  CHECK(eval_budget_expr("nk/(4*eps)", v) == doctest::Approx(25000.0));
  CHECK(eval_budget_expr("-(2 + 3) * -2", v) == doctest::Approx(10.0));
  CHECK(eval_budget_expr("1e3 + n", v) == doctest::Approx(2000.0));
  CHECK(budget_from_expr("n/3", v) == 333);
  CHECK(budget_from_expr("0.3*10", v) == 3);
  CHECK_THROWS_AS(eval_budget_expr("n +", v), ContractViolation);
  CHECK_THROWS_AS(eval_budget_expr("q", v), ContractViolation);
  CHECK_THROWS_AS(eval_budget_expr("n/(k-10)", v), ContractViolation);
  CHECK_THROWS_AS(eval_budget_expr("(n", v), ContractViolation);
  CHECK_THROWS_AS(budget_from_expr("0-n", v), ContractViolation);
}

TEST_CASE("csv output is stable and round-trips") {
  ResultRow r;
  r.experiment = "krr-classify";
  r.seed = 7;
  r.n = 1000;
  r.k = 10.0;
  r.epsilon = 0.1;
  r.metric = "accuracy";
  r.value = 0.1;
  r.distinct_entries = 12;
  r.total_requests = 15;
  r.budget = 20;
  ResultRow s = r;
  s.metric = "trial_ok";
  s.value = 1.0;
  s.budget.reset();
  s.budget_exhausted = true;
  std::ostringstream out;
  write_csv(out, {r, s});
  const std::string golden = std::string(kCsvHeader) +
                             "\n"
                             "krr-classify,7,1000,10,0.10000000000000001,accuracy,"
                             "0.10000000000000001,12,15,20,false\n"
                             "krr-classify,7,1000,10,0.10000000000000001,trial_ok,1,12,15,,true\n";
  CHECK(out.str() == golden);
  std::istringstream in(out.str());
  const auto back = read_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].value == r.value);
  CHECK(back[0].budget == r.budget);
  CHECK_FALSE(back[1].budget);
  CHECK(back[1].budget_exhausted);
  std::istringstream bad("not,a,header\n");
  CHECK_THROWS_AS(read_csv(bad), UsageError);
}

TEST_CASE("config validation") {
  CHECK(parse_config(closed_form_config()).seeds.size() == 4);
  json j = closed_form_config();
  j["experiment"] = "no-such-kind";
  CHECK_THROWS_AS(parse_config(j), UsageError);
  j = closed_form_config();
  j["instance"]["J"] = 21;
  CHECK_THROWS_AS(parse_config(j), UsageError);
  j = closed_form_config();
  j["budget"] = "n*zz";
  CHECK_THROWS_AS(parse_config(j), UsageError);
  j = closed_form_config();
  j.erase("seeds");
  j["trials"] = 3;
  CHECK(parse_config(j).seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK_THROWS_AS(parse_config(json::array()), UsageError);
  CHECK_THROWS_AS(load_config_json("/nonexistent/kbudget.json"), IoError);
}

TEST_CASE("instance parameters round-trip through json") {
  InstanceParams p;
  p.type = InstanceType::mog;
  p.n = 50;
  p.k_or_J = 3;
  p.d = 4;
  p.sigma = 2.0;
  p.separation = 9.0;
  p.seed = 11;
  const json j = p;
  CHECK(j.at("k") == 3);
  CHECK(j.get<InstanceParams>() == p);
}

TEST_CASE("results do not depend on the thread count") {
  const ExperimentConfig c = parse_config(closed_form_config());
  const RunResult one = run(c, 1);
  const RunResult four = run(c, 4);
  std::ostringstream a;
  std::ostringstream b;
  write_csv(a, one.rows);
  write_csv(b, four.rows);
  CHECK(a.str() == b.str());
  CHECK(one.errors.empty());
  CHECK(one.rows.front().seed == 1);
}

TEST_CASE("summary statistics") {
  std::vector<ResultRow> rows;
  for (int i = 0; i < 4; ++i) {
    ResultRow r;
    r.experiment = "x";
    r.seed = static_cast<std::uint64_t>(i);
    r.metric = "m";
    r.value = i;
    rows.push_back(r);
    r.metric = "trial_ok";
    r.value = i < 3 ? 1.0 : 0.0;
    rows.push_back(r);
  }
  const auto s = summarize(rows);
  REQUIRE(s.size() == 2);
  const SummaryRow& m = s[0].metric == "m" ? s[0] : s[1];
  CHECK(m.count == 4);
  CHECK(m.mean == doctest::Approx(1.5));
  CHECK(m.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(m.min == 0.0);
  CHECK(m.max == 3.0);
  REQUIRE(m.success_fraction);
  CHECK(*m.success_fraction == doctest::Approx(0.75));
  CHECK_THROWS_AS(summarize({}), UsageError);
}

TEST_CASE("run and report write their files") {
  const fs::path dir = scratch("outputs");
  json j = closed_form_config();
  j["output"] = dir.string();
  const ExperimentConfig c = parse_config(j);
  write_run_outputs(dir, c, run(c, 2), 2);
  for (const char* f : {"results.csv", "results.json", "manifest.json"}) CHECK(fs::exists(dir / f));
  std::ifstream manifest(dir / "manifest.json");
  const json m = json::parse(manifest);
  CHECK(m.at("threads") == 2);
  CHECK(m.at("seeds").size() == 4);
  write_report(dir);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK_THROWS_AS(write_report(scratch("empty")), IoError);
}

#ifdef KB_CLI_PATH
TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  auto sh = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  const std::string exe = KB_CLI_PATH;
  {
    std::ofstream f(dir / "ok.json");
    f << closed_form_config().dump();
  }
  {
    std::ofstream f(dir / "bad.json");
    f << "{\"experiment\": 3}";
  }
  {
    json j = closed_form_config();
    j["experiment"] = "mog-pipeline";
    j["instance"] = {{"n", 50}, {"k", 2}, {"d", 3}, {"epsilon", 0.5}, {"separation", 30.0}};
    std::ofstream f(dir / "fails.json");
    f << j.dump();
  }
  const std::string out = (dir / "out").string();
  CHECK(sh(exe + " run --config " + (dir / "ok.json").string() + " --out " + out) == 0);
  CHECK(sh(exe + " report --in " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "summary.csv"));
  CHECK(sh("KB_THREADS=1 " + exe + " run --config " + (dir / "ok.json").string() + " --budget 'n*n' --out " + out) == 0);
  CHECK(sh(exe + " run --config " + (dir / "fails.json").string() + " --out " + out) == 1);
  CHECK(sh(exe + " run --config " + (dir / "ok.json").string() + " --budget 'n' --out " + out) == 1);
  CHECK(sh(exe + " run --config " + (dir / "bad.json").string()) == 2);
  CHECK(sh(exe + " frobnicate") == 2);
  CHECK(sh(exe + " run") == 2);
  CHECK(sh(exe + " run --config " + (dir / "ok.json").string() + " --budget 'n+' --out " + out) == 2);
  CHECK(sh(exe + " run --config " + (dir / "missing.json").string()) == 3);
  CHECK(sh(exe + " report --in " + (dir / "nowhere").string()) == 3);
  CHECK(sh(exe + " run --config " + (dir / "ok.json").string() + " --out /proc/kbudget") == 3);
}
#endif
