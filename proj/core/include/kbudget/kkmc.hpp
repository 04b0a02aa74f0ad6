#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kbudget/instances.hpp"
#include "kbudget/oracle.hpp"

namespace kbudget {

/// A partition of n points. Raw ids are compacted to 0..k'-1 in increasing id
/// order, so no reported cluster is empty.
class Clustering {
 public:
  Clustering() = default;
  explicit Clustering(std::span<const std::size_t> raw_ids);

  std::size_t size() const noexcept { return assignment_.size(); }
  std::size_t cluster_count() const noexcept { return sizes_.size(); }
  std::size_t cluster_of(std::size_t i) const { return assignment_.at(i); }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::vector<std::vector<std::size_t>> members() const;

  friend bool operator==(const Clustering&, const Clustering&) = default;

 private:
  std::vector<std::size_t> assignment_;
  std::vector<std::size_t> sizes_;
};

struct CostBreakdown {
  double total = 0.0;
  std::vector<double> per_cluster;
};

/// k-means cost in feature space through the oracle only:
/// sum_j [ sum_{x in C_j} K(x,x) - (1/|C_j|) sum_{x,x' in C_j} K(x,x') ].
/// Reads every within-cluster pair.
CostBreakdown cost_kernel(MeteredGram& gram, const Clustering& clustering);

/// The same cost from explicit coordinates (one point per row).
CostBreakdown cost_explicit(const PointMatrix& points, const Clustering& clustering);

/// Ground-truth clustering by block.
Clustering block_clustering(const KkmcInstance& instance);

/// Largest gamma with (1+g)^2 (1+2 sqrt g)^2 / (1-2 sqrt g)^3 <= 21/20.
inline constexpr double kSmallClusterGamma = 2.3710842122499912e-05;

/// kappa = (1/eps - 1/2) - sqrt((1/eps - 1/2)^2 - 2 tau), for 0 <= tau <= C(1/eps, 2).
double kappa(double tau, double eps);

/// alpha = n / (k·C(1/eps, 2)), the expected copies of each point type.
double type_multiplicity(std::size_t n, std::size_t k, double eps);

/// Small-cluster bound evaluated without its range check:
/// size - (21/20)(alpha/2)(kappa (1/eps - 1)^2 + kappa^2 (1/eps - kappa)) / tau,
/// tau = size/alpha. Requires 0 < size <= n/k.
double small_cluster_bound_value(double size, std::size_t n, std::size_t k, double eps);

/// Smallest size where the small-cluster bound is stated: alpha/gamma.
double small_cluster_min_size(std::size_t n, std::size_t k, double eps);

/// The small-cluster bound on its stated range alpha/gamma <= size <= n/k;
/// throws RangeError outside it.
double small_cluster_lower_bound(double size, std::size_t n, std::size_t k, double eps);

/// |S| - (77/40)·n·eps for |S| <= 2n/5; throws RangeError otherwise.
double multi_cluster_lower_bound(double size_s, std::size_t n, double eps);

/// Per-point cost floor 1 - (81/40)·eps for large clusters.
double large_cluster_bound(double eps);

struct RecoverOptions {
  /// Up to ceil(c/eps) in-cluster partners are sampled per unlabeled point.
  double c = 160.0;
};

struct LabelRecovery {
  /// Recovered block per point; labeled inputs are echoed back.
  std::vector<std::optional<std::size_t>> labels;
  std::size_t unlabeled = 0;
  std::size_t recovered = 0;
  std::size_t samples_drawn = 0;
};

/// Neighbor-sampling label recovery. For each unlabeled point, samples
/// in-cluster partners and queries their inner product; a nonzero product
/// joins the two points. A point is labeled once it is joined, directly or
/// through other joined points, to a point with a known label. Sampling for a
/// point stops as soon as that happens.
LabelRecovery recover_labels(MeteredGram& gram, const Clustering& clustering,
                             std::span<const std::optional<std::size_t>> known, double eps,
                             std::uint64_t seed, const RecoverOptions& options = {});

/// Optimal k-means cost of a rank instance from its ground truth: 0 when
/// unplanted; otherwise the cheapest merge of two point types, 2ab/(a+b)
/// (2s/(s+1) when the planted point joins a group of s copies). Throws
/// DegenerateInstance if some e_1..e_k never occurs.
double rank_cost_gap(const RankInstance& instance);

}  // namespace kbudget
