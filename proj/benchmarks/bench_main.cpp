#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "kbudget/instances.hpp"
#include "kbudget/kkmc.hpp"
#include "kbudget/krr.hpp"
#include "kbudget/mog.hpp"

namespace {

using namespace kbudget;

MogInstance mixture(std::size_t n, std::size_t d) {
  MogParams p;
  p.n = n;
  p.d = d;
  p.k = 4;
  p.separation = 40.0;
  p.seed = 1;
  return gen_mog(p);
}

void BM_OracleFreshQuery(benchmark::State& state) {
  MogInstance inst = mixture(4096, 64);
  const std::size_t n = inst.n;
  std::size_t i = 0;
  for (auto _ : state) {
    if (i == n * n) {
      state.PauseTiming();
      inst.gram = inst.gram.fresh();
      i = 0;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(inst.gram.query(i / n, i % n));
    ++i;
  }
}
BENCHMARK(BM_OracleFreshQuery);

void BM_OracleRepeatQuery(benchmark::State& state) {
  MogInstance inst = mixture(256, 64);
  reveal_all(inst.gram);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst.gram.query(i % 256, (i / 256) % 256));
    ++i;
  }
}
BENCHMARK(BM_OracleRepeatQuery);

void BM_SolveExact(benchmark::State& state) {
  KrrParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.J = 100;
  p.epsilon = 0.1;
  KrrInstance inst = gen_krr(p);
  const Eigen::MatrixXd k = reveal_all(inst.gram);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(k, inst.z, inst.lambda).alpha.data());
}
BENCHMARK(BM_SolveExact)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BootstrapExtract(benchmark::State& state) {
  MogInstance inst = mixture(4096, 64);
  const auto t = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    MeteredGram g = inst.gram.fresh();
    benchmark::DoNotOptimize(bootstrap_extract(g, t).points.data());
  }
}
BENCHMARK(BM_BootstrapExtract)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_SketchApply(benchmark::State& state) {
  MogInstance inst = mixture(4096, 64);
  const auto m = static_cast<std::size_t>(state.range(0));
  const Eigen::MatrixXd pts(inst.gram.hidden_points());
  std::vector<IndexPair> pairs;
  for (std::size_t l = 0; l < m; ++l) pairs.emplace_back(2 * l, 2 * l + 1);
  const SketchOperator s = build_sketch(pts.topRows(static_cast<Eigen::Index>(2 * m)), pairs, 1.0);
  std::size_t i = 2 * m;
  for (auto _ : state) {
    if (i == inst.n) {
      state.PauseTiming();
      inst.gram = inst.gram.fresh();
      i = 2 * m;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(sketch_apply(inst.gram, s, i++).sx.data());
  }
}
BENCHMARK(BM_SketchApply)->Arg(64)->Arg(512);

void BM_CostKernel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  KkmcInstance inst = gen_kkmc(n, 5, 0.1, 1);
  const Clustering c = block_clustering(inst);
  for (auto _ : state) {
    MeteredGram g = inst.gram.fresh();
    benchmark::DoNotOptimize(cost_kernel(g, c).total);
  }
}
BENCHMARK(BM_CostKernel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
