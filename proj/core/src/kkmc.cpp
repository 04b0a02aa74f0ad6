#include "kbudget/kkmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kbudget/rng.hpp"

namespace kbudget {
namespace {

constexpr std::uint64_t kRecoverTag = 0x7265636f766572;  // "recover"

double choose2(double w) { return w * (w - 1.0) / 2.0; }

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n), label(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    parent[b] = a;
    if (!label[a]) label[a] = label[b];
  }
  std::vector<std::size_t> parent;
  std::vector<std::optional<std::size_t>> label;
};

}  // namespace

Clustering::Clustering(std::span<const std::size_t> raw_ids) {
  std::vector<std::size_t> ids(raw_ids.begin(), raw_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  sizes_.assign(ids.size(), 0);
  assignment_.reserve(raw_ids.size());
  for (const std::size_t raw : raw_ids) {
    const auto c = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), raw) -
                                            ids.begin());
    assignment_.push_back(c);
    ++sizes_[c];
  }
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(sizes_.size());
  for (std::size_t c = 0; c < sizes_.size(); ++c) out[c].reserve(sizes_[c]);
  for (std::size_t i = 0; i < assignment_.size(); ++i) out[assignment_[i]].push_back(i);
  return out;
}

CostBreakdown cost_kernel(MeteredGram& gram, const Clustering& clustering) {
  if (clustering.size() != gram.size()) {
    throw ContractViolation("cost_kernel: clustering covers " + std::to_string(clustering.size()) +
                            " points, oracle has " + std::to_string(gram.size()));
  }
  CostBreakdown out;
  for (const auto& members : clustering.members()) {
    double diag = 0.0;
    double off = 0.0;
    for (std::size_t b = 0; b < members.size(); ++b) {
      diag += gram.query(members[b], members[b]);
      for (std::size_t a = 0; a < b; ++a) off += gram.query(members[a], members[b]);
    }
    const double cost = diag - (diag + 2.0 * off) / static_cast<double>(members.size());
    out.per_cluster.push_back(cost);
    out.total += cost;
  }
  return out;
}

CostBreakdown cost_explicit(const PointMatrix& points, const Clustering& clustering) {
  if (clustering.size() != static_cast<std::size_t>(points.rows())) {
    throw ContractViolation("cost_explicit: clustering and point count differ");
  }
  const std::size_t k = clustering.cluster_count();
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
  for (std::size_t i = 0; i < clustering.size(); ++i) {
    centroids.row(static_cast<Eigen::Index>(clustering.cluster_of(i))) +=
        points.row(static_cast<Eigen::Index>(i));
  }
  for (std::size_t c = 0; c < k; ++c) {
    centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(clustering.sizes()[c]);
  }
  CostBreakdown out;
  out.per_cluster.assign(k, 0.0);
  for (std::size_t i = 0; i < clustering.size(); ++i) {
    const auto c = clustering.cluster_of(i);
    out.per_cluster[c] +=
        (points.row(static_cast<Eigen::Index>(i)) - centroids.row(static_cast<Eigen::Index>(c)))
            .squaredNorm();
  }
  out.total = std::accumulate(out.per_cluster.begin(), out.per_cluster.end(), 0.0);
  return out;
}

Clustering block_clustering(const KkmcInstance& instance) { return Clustering(instance.blocks); }

double kappa(double tau, double eps) {
  const double w = 1.0 / eps;
  const double h = w - 0.5;
  const double disc = h * h - 2.0 * tau;
  if (tau < 0.0 || disc < -1e-9 * h * h) {
    throw ContractViolation("kappa: tau = " + std::to_string(tau) + " outside [0, C(1/eps, 2)]");
  }
  return h - std::sqrt(std::max(disc, 0.0));
}

double type_multiplicity(std::size_t n, std::size_t k, double eps) {
  return static_cast<double>(n) / (static_cast<double>(k) * choose2(1.0 / eps));
}

double small_cluster_bound_value(double size, std::size_t n, std::size_t k, double eps) {
  const double cap = static_cast<double>(n) / static_cast<double>(k);
  if (!(size > 0.0) || size > cap * (1.0 + 1e-12)) {
    throw RangeError("small-cluster bound needs 0 < size <= n/k");
  }
  const double w = 1.0 / eps;
  const double alpha = type_multiplicity(n, k, eps);
  const double tau = std::min(size / alpha, choose2(w));
  const double kap = kappa(tau, eps);
  return size -
         (21.0 / 20.0) * (alpha / 2.0) * (kap * (w - 1.0) * (w - 1.0) + kap * kap * (w - kap)) / tau;
}

double small_cluster_min_size(std::size_t n, std::size_t k, double eps) {
  return type_multiplicity(n, k, eps) / kSmallClusterGamma;
}

double small_cluster_lower_bound(double size, std::size_t n, std::size_t k, double eps) {
  const double lo = small_cluster_min_size(n, k, eps);
  const double hi = static_cast<double>(n) / static_cast<double>(k);
  if (size < lo || size > hi) {
    throw RangeError("small-cluster bound stated for " + std::to_string(lo) +
                     " <= size <= " + std::to_string(hi) + ", got " + std::to_string(size));
  }
  return small_cluster_bound_value(size, n, k, eps);
}

double multi_cluster_lower_bound(double size_s, std::size_t n, double eps) {
  if (size_s < 0.0 || size_s > 0.4 * static_cast<double>(n)) {
    throw RangeError("multi-cluster bound stated for |S| <= 2n/5");
  }
  return size_s - (77.0 / 40.0) * static_cast<double>(n) * eps;
}

double large_cluster_bound(double eps) { return 1.0 - (81.0 / 40.0) * eps; }

LabelRecovery recover_labels(MeteredGram& gram, const Clustering& clustering,
                             std::span<const std::optional<std::size_t>> known, double eps,
                             std::uint64_t seed, const RecoverOptions& options) {
  const std::size_t n = gram.size();
  if (clustering.size() != n || known.size() != n) {
    throw ContractViolation("recover_labels: clustering, labels and oracle sizes differ");
  }
  if (!(eps > 0.0) || !(options.c > 0.0)) {
    throw ContractViolation("recover_labels: eps and c must be positive");
  }
  const auto max_samples = static_cast<std::size_t>(std::ceil(options.c / eps));
  const auto members = clustering.members();
  std::vector<std::size_t> position(n);
  for (const auto& m : members) {
    for (std::size_t p = 0; p < m.size(); ++p) position[m[p]] = p;
  }

  UnionFind uf(n);
  LabelRecovery out;
  for (std::size_t i = 0; i < n; ++i) {
    uf.label[i] = known[i];
    if (!known[i]) ++out.unlabeled;
  }

  CounterRng rng = CounterRng(seed, streams::kAlgorithm).substream(kRecoverTag);
  for (std::size_t x = 0; x < n; ++x) {
    if (known[x]) continue;
    const auto& cluster = members[clustering.cluster_of(x)];
    if (cluster.size() < 2) continue;
    for (std::size_t s = 0; s < max_samples && !uf.label[uf.find(x)]; ++s) {
      std::size_t p = rng.uniform_index(cluster.size() - 1);
      if (p >= position[x]) ++p;
      const std::size_t y = cluster[p];
      ++out.samples_drawn;
      if (gram.query(x, y) != 0.0) uf.unite(x, y);
    }
  }

  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.labels[i] = known[i] ? known[i] : uf.label[uf.find(i)];
    if (!known[i] && out.labels[i]) ++out.recovered;
  }
  return out;
}

double rank_cost_gap(const RankInstance& instance) {
  std::vector<std::size_t> counts(instance.k + 1, 0);
  for (const std::size_t b : instance.basis) ++counts.at(b);
  for (std::size_t j = 0; j < instance.k; ++j) {
    if (counts[j] == 0) {
      throw DegenerateInstance("rank instance never draws e_" + std::to_string(j + 1));
    }
  }
  if (counts[instance.k] == 0) return 0.0;
  // k+1 types into k clusters: exactly two types share a cluster; merging
  // groups of a and b orthonormal copies costs 2ab/(a+b).
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a <= instance.k; ++a) {
    for (std::size_t b = a + 1; b <= instance.k; ++b) {
      const double ca = static_cast<double>(counts[a]);
      const double cb = static_cast<double>(counts[b]);
      best = std::min(best, 2.0 * ca * cb / (ca + cb));
    }
  }
  return best;
}

}  // namespace kbudget
