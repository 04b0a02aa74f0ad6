#include "kbudget/mog.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>

#include "kbudget/rng.hpp"

namespace kbudget {
namespace {

constexpr std::uint64_t kPairingTag = 0x70616972;  // "pair"

template <class F>
auto run_stage(const char* stage, std::vector<StageTiming>& timings, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    timings.push_back({stage, elapsed.count()});
  };
  try {
    auto result = body();
    record();
    return result;
  } catch (const StageError&) {
    record();
    throw;
  } catch (const std::exception& e) {
    record();
    throw StageError(stage, e.what());
  }
}

}  // namespace

Bootstrap bootstrap_extract(MeteredGram& gram, std::size_t t) {
  if (t == 0 || t > gram.size()) {
    throw ContractViolation("bootstrap_extract: need 0 < t <= n");
  }
  std::vector<std::size_t> idx(t);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const Eigen::MatrixXd g = reveal_block(gram, idx);

  const auto tt = static_cast<Eigen::Index>(t);
  Eigen::VectorXd residual = g.diagonal();
  const double scale = std::max(residual.maxCoeff(), 0.0);
  const double stop = 1e-10 * scale;
  std::vector<bool> chosen(t, false);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(tt, tt);
  Eigen::Index rank = 0;
  for (; rank < tt; ++rank) {
    Eigen::Index p = -1;
    for (Eigen::Index i = 0; i < tt; ++i) {
      if (!chosen[static_cast<std::size_t>(i)] && (p < 0 || residual(i) > residual(p))) p = i;
    }
    if (residual(p) <= stop) break;
    const double pivot = std::sqrt(residual(p));
    Eigen::VectorXd col = g.col(p);
    if (rank > 0) col.noalias() -= l.leftCols(rank) * l.row(p).head(rank).transpose();
    col /= pivot;
    for (Eigen::Index i = 0; i < tt; ++i) {
      if (chosen[static_cast<std::size_t>(i)]) col(i) = 0.0;
    }
    col(p) = pivot;
    chosen[static_cast<std::size_t>(p)] = true;
    l.col(rank) = col;
    residual -= col.cwiseAbs2();
    residual(p) = 0.0;
  }
  const double floor = -std::max(1e-8, 1e-12 * scale);
  for (Eigen::Index i = 0; i < tt; ++i) {
    if (!chosen[static_cast<std::size_t>(i)] && residual(i) < floor) {
      throw NumericalDegeneracy("bootstrap_extract: Gram block is not PSD (pivot " +
                                std::to_string(residual(i)) + ")");
    }
  }
  Bootstrap b;
  b.t = t;
  b.points = l.leftCols(rank);
  return b;
}

std::size_t default_min_samples(std::size_t d, std::size_t k) {
  return static_cast<std::size_t>(
      std::ceil(2.0 * (static_cast<double>(d) + std::log(static_cast<double>(k)))));
}

Eigen::MatrixXd estimate_means(const Eigen::MatrixXd& points, std::span<const std::size_t> labels,
                               std::size_t k, std::size_t min_per_component) {
  if (labels.size() != static_cast<std::size_t>(points.rows())) {
    throw ContractViolation("estimate_means: one label per point required");
  }
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) throw ContractViolation("estimate_means: label out of range");
    means.row(static_cast<Eigen::Index>(labels[i])) += points.row(static_cast<Eigen::Index>(i));
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] < std::max<std::size_t>(min_per_component, 1)) {
      throw StageError("estimate_means", "component " + std::to_string(c) + " has " +
                                             std::to_string(counts[c]) + " samples, need " +
                                             std::to_string(min_per_component));
    }
    means.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
  }
  return means;
}

PairSide pair_test(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& mu1,
                   const Eigen::Ref<const Eigen::VectorXd>& mu2) {
  const Eigen::VectorXd c = 0.5 * (mu1 + mu2);
  return (x - c).dot(mu1 - c) > 0.0 ? PairSide::first : PairSide::second;
}

Assignment assign_all_pairs(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::MatrixXd& means) {
  const auto k = static_cast<std::size_t>(means.rows());
  if (k == 0) throw ContractViolation("assign_all_pairs: no means");
  for (std::size_t j = 0; j < k; ++j) {
    bool wins = true;
    for (std::size_t l = 0; l < k && wins; ++l) {
      if (l == j) continue;
      wins = pair_test(x, means.row(static_cast<Eigen::Index>(j)).transpose(),
                       means.row(static_cast<Eigen::Index>(l)).transpose()) == PairSide::first;
    }
    if (wins) return {j, false};
  }
  Eigen::Index nearest = 0;
  (means.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff(&nearest);
  return {static_cast<std::size_t>(nearest), true};
}

Eigen::VectorXd SketchOperator::projection_from_sketch(const Eigen::VectorXd& sx) const {
  return (u.transpose() * sx).cwiseQuotient(singular);
}

Eigen::VectorXd SketchOperator::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return v.transpose() * x;
}

bool SketchOperator::is_source(std::size_t i) const {
  return std::any_of(sources.begin(), sources.end(),
                     [i](const IndexPair& p) { return p.first == i || p.second == i; });
}

SketchOperator build_sketch(const Eigen::MatrixXd& points, std::span<const IndexPair> pairs,
                            double sigma) {
  if (pairs.empty()) throw ContractViolation("build_sketch: need at least one pair");
  if (!(sigma > 0.0)) throw ContractViolation("build_sketch: sigma must be positive");
  SketchOperator s;
  s.m = pairs.size();
  s.sources.assign(pairs.begin(), pairs.end());
  s.scale = sigma * std::sqrt(2.0);
  s.rows.resize(static_cast<Eigen::Index>(s.m), points.cols());
  for (std::size_t l = 0; l < s.m; ++l) {
    const auto [a, b] = pairs[l];
    if (a >= static_cast<std::size_t>(points.rows()) ||
        b >= static_cast<std::size_t>(points.rows())) {
      throw ContractViolation("build_sketch: pair index out of range");
    }
    const Eigen::RowVectorXd diff =
        points.row(static_cast<Eigen::Index>(a)) - points.row(static_cast<Eigen::Index>(b));
    if (diff.squaredNorm() == 0.0) {
      throw NumericalDegeneracy("build_sketch: pair (" + std::to_string(a) + ", " +
                                std::to_string(b) + ") has identical points");
    }
    s.rows.row(static_cast<Eigen::Index>(l)) = diff / s.scale;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(s.rows, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index r = std::min(s.rows.rows(), s.rows.cols());
  const Eigen::VectorXd& sv = svd.singularValues();
  if (r == 0 || sv(r - 1) <= 1e-10 * sv(0)) {
    throw NumericalDegeneracy("build_sketch: degenerate sketch (rows linearly dependent)");
  }
  s.u = svd.matrixU().leftCols(r);
  s.singular = sv.head(r);
  s.v = svd.matrixV().leftCols(r);
  return s;
}

SketchedPoint sketch_apply(MeteredGram& gram, const SketchOperator& sketch, std::size_t i) {
  if (sketch.is_source(i)) {
    throw ContractViolation("sketch_apply: point " + std::to_string(i) + " is a sketch source");
  }
  SketchedPoint out;
  out.index = i;
  out.sx.resize(static_cast<Eigen::Index>(sketch.m));
  for (std::size_t l = 0; l < sketch.m; ++l) {
    const auto [a, b] = sketch.sources[l];
    const bool new_a = !gram.is_revealed(a, i);
    const bool new_b = !gram.is_revealed(b, i);
    const double ka = gram.query(a, i);
    const double kb = gram.query(b, i);
    out.queries_spent += static_cast<std::size_t>(new_a) + static_cast<std::size_t>(new_b);
    out.sx(static_cast<Eigen::Index>(l)) = (ka - kb) / sketch.scale;
  }
  return out;
}

Assignment sketched_assign(const SketchOperator& sketch, const SketchedPoint& sx,
                           const Eigen::MatrixXd& means) {
  const Eigen::MatrixXd projected = means * sketch.v;
  return assign_all_pairs(sketch.projection_from_sketch(sx.sx), projected);
}

std::size_t sketch_dimension(std::size_t n, const MogConfig& config) {
  if (config.m) return *config.m;
  const double nk = static_cast<double>(n) * static_cast<double>(config.k);
  return static_cast<std::size_t>(
      std::ceil(config.c_sketch / config.epsilon * config.delta_exponent * std::log(nk)));
}

std::size_t bootstrap_size(std::size_t n, const MogConfig& config) {
  if (config.t) return *config.t;
  const std::size_t m = sketch_dimension(n, config);
  const std::size_t s = config.min_samples.value_or(default_min_samples(config.d, config.k));
  return std::max({2 * config.k * s, 2 * m + config.k, config.d});
}

std::uint64_t pipeline_query_count(std::size_t n, std::size_t t, std::size_t m) {
  const auto tt = static_cast<std::uint64_t>(t);
  return tt * (tt + 1) / 2 + 2 * static_cast<std::uint64_t>(m) * (n - tt);
}

double pair_test_separation(double sigma, double delta) {
  return sigma * std::sqrt(144.0 * std::log(1.0 / delta));
}

double pipeline_separation(std::size_t n, const MogConfig& config) {
  const double m = static_cast<double>(sketch_dimension(n, config));
  const double delta = std::pow(2.0 * m + static_cast<double>(config.k), -3.0);
  return std::max(pair_test_separation(config.sigma, delta),
                  config.sigma * std::sqrt(config.epsilon * static_cast<double>(config.d)));
}

MogResult cluster_mog(MeteredGram& gram, const MogConfig& config,
                      std::span<const std::size_t> labels) {
  const std::size_t n = gram.size();
  if (config.k == 0 || !(config.epsilon > 0.0) || !(config.sigma > 0.0)) {
    throw ContractViolation("cluster_mog: need k >= 1, eps > 0, sigma > 0");
  }
  MogResult result;
  result.m = sketch_dimension(n, config);
  result.t = bootstrap_size(n, config);
  const std::size_t t = result.t;
  const std::size_t m = result.m;
  if (t > n) {
    throw StageError("bootstrap", "bootstrap size t = " + std::to_string(t) + " exceeds n = " +
                                      std::to_string(n));
  }
  if (labels.size() < t) {
    throw ContractViolation("cluster_mog: labels must cover the bootstrap points");
  }
  auto& timings = result.stage_timings;

  const Bootstrap boot =
      run_stage("bootstrap", timings, [&] { return bootstrap_extract(gram, t); });
  result.frame_rank = boot.rank();

  const Eigen::MatrixXd means = run_stage("estimate_means", timings, [&] {
    const std::size_t s = config.min_samples.value_or(default_min_samples(config.d, config.k));
    return estimate_means(boot.points, labels.first(t), config.k, s);
  });

  if (config.k == 1) {
    result.clustering = Clustering(std::vector<std::size_t>(n, 0));
    result.report = gram.report();
    return result;
  }

  std::vector<Assignment> frame_assign(t);
  const std::vector<IndexPair> pairs = run_stage("pair_identification", timings, [&] {
    std::vector<std::vector<std::size_t>> groups(config.k);
    for (std::size_t i = 0; i < t; ++i) {
      frame_assign[i] = assign_all_pairs(boot.points.row(static_cast<Eigen::Index>(i)).transpose(),
                                         means);
      if (!frame_assign[i].fallback) groups[frame_assign[i].center].push_back(i);
    }
    CounterRng rng = CounterRng(config.seed, streams::kAlgorithm).substream(kPairingTag);
    for (auto& g : groups) {
      for (std::size_t i = g.size(); i > 1; --i) std::swap(g[i - 1], g[rng.uniform_index(i)]);
    }
    // Disjoint pairs taken round-robin over components; identical points are skipped.
    std::vector<IndexPair> out;
    std::vector<std::size_t> cursor(config.k, 0);
    bool progress = true;
    while (out.size() < m && progress) {
      progress = false;
      for (std::size_t c = 0; c < config.k && out.size() < m; ++c) {
        auto& g = groups[c];
        while (cursor[c] + 1 < g.size()) {
          const std::size_t a = g[cursor[c]];
          const std::size_t b = g[cursor[c] + 1];
          cursor[c] += 2;
          if ((boot.points.row(static_cast<Eigen::Index>(a)) -
               boot.points.row(static_cast<Eigen::Index>(b)))
                  .squaredNorm() > 0.0) {
            out.emplace_back(a, b);
            progress = true;
            break;
          }
        }
      }
    }
    if (out.size() < m) {
      throw StageError("pair_identification", "found " + std::to_string(out.size()) +
                                                  " same-mean pairs, need " + std::to_string(m));
    }
    return out;
  });

  const SketchOperator sketch = run_stage(
      "build_sketch", timings, [&] { return build_sketch(boot.points, pairs, config.sigma); });

  std::vector<std::size_t> centers = run_stage("assign", timings, [&] {
    std::vector<std::size_t> out(n);
    std::vector<bool> source(t, false);
    for (const auto& [a, b] : pairs) {
      source[a] = true;
      source[b] = true;
      out[a] = frame_assign[a].center;
      out[b] = frame_assign[b].center;
    }
    const Eigen::MatrixXd projected = means * sketch.v;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < t && source[i]) continue;
      const SketchedPoint sx = sketch_apply(gram, sketch, i);
      const Assignment a = assign_all_pairs(sketch.projection_from_sketch(sx.sx), projected);
      out[i] = a.center;
      if (a.fallback) ++result.fallbacks;
    }
    return out;
  });

  result.clustering = Clustering(centers);
  result.report = gram.report();
  return result;
}

}  // namespace kbudget
