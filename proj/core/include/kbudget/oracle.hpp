#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "kbudget/errors.hpp"

namespace kbudget {

/// Hidden point sets are stored one point per row, contiguous.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class KernelKind { linear, indicator };

/// Kernel function over the hidden points. `linear` is the dot product;
/// `indicator` is defined on standard basis vectors only and takes value c1
/// on equal vectors and c0 otherwise (c1 > c0).
class KernelSpec {
 public:
  static KernelSpec linear() { return KernelSpec(KernelKind::linear, 0.0, 1.0); }
  static KernelSpec indicator(double c0, double c1);

  KernelKind kind() const noexcept { return kind_; }
  double c0() const noexcept { return c0_; }
  double c1() const noexcept { return c1_; }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  KernelSpec(KernelKind kind, double c0, double c1) : kind_(kind), c0_(c0), c1_(c1) {}

  KernelKind kind_;
  double c0_;
  double c1_;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Immutable snapshot of an oracle's ledger.
struct QueryReport {
  std::uint64_t distinct_entries = 0;
  std::uint64_t total_requests = 0;
  std::optional<std::uint64_t> budget;
  /// True once a request for a new entry has been refused.
  bool budget_exhausted = false;
  /// per_row[i] = number of distinct revealed entries in row i (the diagonal
  /// entry counts once, an off-diagonal entry counts for both of its rows).
  std::vector<std::uint64_t> per_row;
};

/// The only access path to kernel values: a Gram matrix over hidden points,
/// metered per distinct unordered entry (i, j), with an optional budget on
/// distinct entries.
///
/// Revealed entries are remembered, so re-reading costs a request but never a
/// new distinct entry. Entry values are a pure function of the immutable
/// hidden points, so a revisit returns the bit-identical value without storing
/// it. Indices are 0-based.
///
/// Thread-safe: ledger updates are serialized; the final counts equal those of
/// some serialization of the concurrent queries.
class MeteredGram {
 public:
  /// Empty oracle (n = 0).
  MeteredGram();
  MeteredGram(PointMatrix points, KernelSpec spec, std::optional<std::uint64_t> budget = {});
  MeteredGram(std::shared_ptr<const PointMatrix> points, KernelSpec spec,
              std::optional<std::uint64_t> budget = {});

  MeteredGram(MeteredGram&&) noexcept;
  MeteredGram& operator=(MeteredGram&&) noexcept;
  ~MeteredGram();

  std::size_t size() const noexcept;
  const KernelSpec& spec() const noexcept;

  /// K(i, j). Throws BudgetExhausted if (i, j) is new and the budget is spent,
  /// ContractViolation on an out-of-range index.
  double query(std::size_t i, std::size_t j);

  bool is_revealed(std::size_t i, std::size_t j) const;

  QueryReport report() const;

  /// A fresh oracle over the same hidden points with an empty ledger.
  MeteredGram fresh(std::optional<std::uint64_t> budget = {}) const;

  /// Ground truth for verification code. Reading through this is unmetered;
  /// algorithms must never call it.
  const PointMatrix& hidden_points() const noexcept;

 private:
  struct State;
  std::shared_ptr<const PointMatrix> points_;
  KernelSpec spec_;
  std::unique_ptr<State> state_;
};

/// Reads the full upper triangle (with diagonal) through the oracle.
Eigen::MatrixXd reveal_all(MeteredGram& gram);

/// Reads the principal submatrix on `indices` through the oracle.
Eigen::MatrixXd reveal_block(MeteredGram& gram, std::span<const std::size_t> indices);

}  // namespace kbudget
