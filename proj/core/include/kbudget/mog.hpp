#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kbudget/kkmc.hpp"
#include "kbudget/oracle.hpp"

namespace kbudget {

using IndexPair = std::pair<std::size_t, std::size_t>;

/// The leading t points, recovered from their t×t Gram block up to a common
/// rotation. Row i is point i; the frame has one column per recovered
/// dimension (the numerical rank of the block).
struct Bootstrap {
  std::size_t t = 0;
  Eigen::MatrixXd points;

  std::size_t rank() const noexcept { return static_cast<std::size_t>(points.cols()); }
};

/// Reads the t×t leading block (t(t+1)/2 distinct entries) and factorizes it
/// by pivoted Cholesky, stopping once the largest remaining pivot is below
/// 1e-10 of the largest diagonal entry. Throws NumericalDegeneracy if a
/// remaining pivot is below -1e-8 (block not PSD).
Bootstrap bootstrap_extract(MeteredGram& gram, std::size_t t);

/// Per-component sample floor ceil(2·(d + ln k)).
std::size_t default_min_samples(std::size_t d, std::size_t k);

/// Empirical mean per component, one per row. `labels[i]` is the component
/// of row i of `points`. Throws StageError("estimate_means") when a component
/// has fewer than `min_per_component` points.
Eigen::MatrixXd estimate_means(const Eigen::MatrixXd& points, std::span<const std::size_t> labels,
                               std::size_t k, std::size_t min_per_component);

enum class PairSide { first, second };

/// first iff (x - c)·(mu1 - c) > 0 with c = (mu1 + mu2)/2; zero goes to second.
PairSide pair_test(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& mu1,
                   const Eigen::Ref<const Eigen::VectorXd>& mu2);

struct Assignment {
  std::size_t center = 0;
  /// No mean won all of its pair tests; `center` is the nearest mean instead.
  bool fallback = false;
};

/// Returns the mean j (one per row of `means`) that wins pair_test against
/// every other mean, or the nearest mean flagged as a fallback.
Assignment assign_all_pairs(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::MatrixXd& means);

/// S with rows (x_a - x_b)/(sigma·sqrt 2) over same-mean pairs (a, b), and its
/// thin SVD S = U diag(singular) V^T with r' = min(m, frame rank) components.
struct SketchOperator {
  std::size_t m = 0;
  std::vector<IndexPair> sources;
  double scale = 1.0;
  Eigen::MatrixXd rows;
  Eigen::MatrixXd u;
  Eigen::VectorXd singular;
  Eigen::MatrixXd v;

  /// V^T x = diag(singular)^{-1} U^T (S x).
  Eigen::VectorXd projection_from_sketch(const Eigen::VectorXd& sx) const;
  /// V^T x from coordinates in the frame of `rows`.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  bool is_source(std::size_t i) const;
};

/// `points` row i holds the coordinates of oracle point i (for example a
/// bootstrap frame). Throws NumericalDegeneracy on a zero-difference pair or
/// when the rows are linearly dependent.
SketchOperator build_sketch(const Eigen::MatrixXd& points, std::span<const IndexPair> pairs,
                            double sigma);

struct SketchedPoint {
  std::size_t index = 0;
  Eigen::VectorXd sx;
  /// New distinct entries charged by this application (at most 2m).
  std::size_t queries_spent = 0;
};

/// (S x_i)_l = (K(a_l, i) - K(b_l, i))/scale via 2m oracle reads.
SketchedPoint sketch_apply(MeteredGram& gram, const SketchOperator& sketch, std::size_t i);

/// Projects x and the means through V^T and runs assign_all_pairs there.
Assignment sketched_assign(const SketchOperator& sketch, const SketchedPoint& sx,
                           const Eigen::MatrixXd& means);

struct MogConfig {
  std::size_t k = 1;
  double epsilon = 0.25;
  double sigma = 1.0;
  std::size_t d = 1;
  double c_sketch = 8.0;
  /// delta = (nk)^{-delta_exponent} for the sketch dimension.
  double delta_exponent = 3.0;
  std::uint64_t seed = 0;
  /// Overrides for the derived sizes.
  std::optional<std::size_t> t;
  std::optional<std::size_t> m;
  std::optional<std::size_t> min_samples;
};

/// m = ceil(C/eps · delta_exponent · ln(nk)).
std::size_t sketch_dimension(std::size_t n, const MogConfig& config);
/// t = max(2k·min_samples, 2m + k, d).
std::size_t bootstrap_size(std::size_t n, const MogConfig& config);
/// t(t+1)/2 + 2m(n - t): the block, then 2m fresh reads per point outside it.
std::uint64_t pipeline_query_count(std::size_t n, std::size_t t, std::size_t m);
/// sigma·sqrt(144 ln(1/delta)).
double pair_test_separation(double sigma, double delta);
/// max(pair_test_separation(sigma, (2m+k)^{-3}), sigma·sqrt(eps·d)).
double pipeline_separation(std::size_t n, const MogConfig& config);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct MogResult {
  Clustering clustering;
  QueryReport report;
  std::size_t t = 0;
  std::size_t m = 0;
  std::size_t frame_rank = 0;
  std::size_t fallbacks = 0;
  std::vector<StageTiming> stage_timings;
};

/// Bootstrap, mean estimation, same-mean pair identification, sketch, and
/// sketched assignment of every point outside the sketch sources. `labels`
/// supplies ground-truth components for the bootstrap points [0, t) only.
/// Failures are rethrown as StageError tagged with the failing stage.
MogResult cluster_mog(MeteredGram& gram, const MogConfig& config,
                      std::span<const std::size_t> labels);

}  // namespace kbudget
