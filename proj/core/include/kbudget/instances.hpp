#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kbudget/oracle.hpp"

namespace kbudget {

// ---------------------------------------------------------------------------
// Kernel ridge regression hard instance
// ---------------------------------------------------------------------------

enum class KrrClass { s1, s2 };

struct KrrParams {
  std::size_t n = 0;
  /// Number of basis slots; must be divisible by 4. Points live in the first
  /// 3J/4 basis vectors.
  std::size_t J = 0;
  double epsilon = 0.1;
  /// Append k points (n/k)·e_i on fresh coordinates (k = epsilon·J, must be
  /// integral). Linear kernel only.
  bool augmented = false;
  KernelSpec spec = KernelSpec::linear();
  std::uint64_t seed = 0;
};

/// Each point is a standard basis vector: with probability 1/2 uniform over
/// the first J/2 (class S1), otherwise uniform over the next J/4 (class S2).
/// Target z = 1, regularization lambda = (c1 - c0)·n/k, which is n/k for the
/// linear kernel.
struct KrrInstance {
  std::size_t n = 0;
  std::size_t J = 0;
  double epsilon = 0.0;
  double k = 0.0;
  double lambda = 0.0;
  bool augmented = false;
  std::size_t appended = 0;
  KernelSpec spec = KernelSpec::linear();
  /// Per original point: 0-based basis index in [0, 3J/4) and its class.
  std::vector<std::size_t> basis;
  std::vector<KrrClass> classes;
  /// counts[j] = number of original points equal to e_j.
  std::vector<std::size_t> counts;
  Eigen::VectorXd z;
  MeteredGram gram;
  /// Asymptotic preconditions that do not hold at this size (informational).
  std::vector<std::string> advisories;

  std::size_t total_points() const noexcept { return n + appended; }
};

KrrInstance gen_krr(const KrrParams& params);

/// Deterministic hard instance with prescribed per-basis counts (length 3J/4),
/// points laid out in basis order.
KrrInstance krr_from_counts(std::span<const std::size_t> counts, std::size_t J, double epsilon,
                            KernelSpec spec = KernelSpec::linear());

inline KrrClass krr_class_of(std::size_t basis_index, std::size_t J) {
  return basis_index < J / 2 ? KrrClass::s1 : KrrClass::s2;
}

// ---------------------------------------------------------------------------
// Rank hard instance
// ---------------------------------------------------------------------------

struct RankInstance {
  std::size_t n = 0;
  std::size_t k = 0;
  /// 0-based basis index per point; index k is the planted direction e_{k+1}.
  std::vector<std::size_t> basis;
  bool planted = false;
  std::optional<std::size_t> planted_index;
  MeteredGram gram;
};

RankInstance gen_rank(std::size_t n, std::size_t k, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Kernel k-means hard instance
// ---------------------------------------------------------------------------

/// Points v = (e_l1 + e_l2)/sqrt(2) in R^{k/eps}: the coordinates split into k
/// blocks of 1/eps; a point picks a block, then an unordered pair inside it.
struct KkmcInstance {
  std::size_t n = 0;
  std::size_t k = 0;
  double epsilon = 0.0;
  /// 1/epsilon, the block width.
  std::size_t block_width = 0;
  std::vector<std::size_t> blocks;
  /// In-block coordinate pair (first < second), 0-based within the block.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  MeteredGram gram;
  std::vector<std::string> advisories;

  std::size_t dimension() const noexcept { return k * block_width; }
  std::size_t types_per_block() const noexcept { return block_width * (block_width - 1) / 2; }
};

KkmcInstance gen_kkmc(std::size_t n, std::size_t k, double epsilon, std::uint64_t seed);

/// Exactly balanced instance: every (block, pair) type appears `copies` times,
/// so n = k·C(1/eps, 2)·copies. Order is shuffled with `seed`.
KkmcInstance gen_kkmc_balanced(std::size_t k, double epsilon, std::size_t copies,
                               std::uint64_t seed);

std::size_t block_of(const KkmcInstance& instance, std::size_t i);

/// Validates that 1/epsilon is an integer >= 2 and returns it.
std::size_t block_width_of(double epsilon);

// ---------------------------------------------------------------------------
// Mixture of Gaussians
// ---------------------------------------------------------------------------

struct MogParams {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 1;
  double sigma = 1.0;
  /// Required minimum pairwise distance between means.
  double separation = 0.0;
  std::uint64_t seed = 0;
};

struct MogInstance {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  double sigma = 0.0;
  double separation = 0.0;
  /// One mean per row.
  Eigen::MatrixXd means;
  Eigen::VectorXd weights;
  std::vector<std::size_t> labels;
  MeteredGram gram;
};

/// Means are separation·q_l for orthonormal q_l when k <= d, otherwise
/// rejection-sampled; throws GenerationFailure if that does not succeed.
MogInstance gen_mog(const MogParams& params);

// ---------------------------------------------------------------------------
// Parameter blocks
// ---------------------------------------------------------------------------

enum class InstanceType { krr, rank, kkmc, mog };

/// Flat parameter block shared by all generators; `k_or_J` is J for krr and
/// k otherwise.
struct InstanceParams {
  InstanceType type = InstanceType::krr;
  std::size_t n = 0;
  std::size_t k_or_J = 0;
  double epsilon = 0.1;
  double sigma = 1.0;
  std::size_t d = 0;
  double separation = 0.0;
  std::uint64_t seed = 0;
  bool augmented = false;

  friend bool operator==(const InstanceParams&, const InstanceParams&) = default;
};

std::string to_string(InstanceType type);
InstanceType instance_type_from_string(const std::string& name);

}  // namespace kbudget
