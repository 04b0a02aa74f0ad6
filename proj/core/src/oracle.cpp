#include "kbudget/oracle.hpp"

#include <mutex>
#include <string>
#include <unordered_set>

namespace kbudget {
namespace {

// Index of the single unit entry of a standard basis vector, or -1.
std::ptrdiff_t basis_index(std::span<const double> x) {
  std::ptrdiff_t found = -1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    if (x[i] != 1.0 || found >= 0) return -1;
    found = static_cast<std::ptrdiff_t>(i);
  }
  return found;
}

// Dense bit set up to this many unordered pairs (32 MiB), hash set above.
constexpr std::uint64_t kDensePairLimit = std::uint64_t{1} << 28;

std::uint64_t pair_key(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return static_cast<std::uint64_t>(j) * (j + 1) / 2 + i;
}

}  // namespace

KernelSpec KernelSpec::indicator(double c0, double c1) {
  if (!(c1 > c0)) {
    throw ContractViolation("indicator kernel requires c1 > c0");
  }
  return KernelSpec(KernelKind::indicator, c0, c1);
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ContractViolation("kernel_eval: dimension mismatch (" + std::to_string(x.size()) +
                            " vs " + std::to_string(y.size()) + ")");
  }
  if (spec.kind() == KernelKind::linear) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
  }
  const auto a = basis_index(x);
  const auto b = basis_index(y);
  if (a < 0 || b < 0) {
    throw ContractViolation("kernel_eval: indicator kernel applied to a non-basis vector");
  }
  return a == b ? spec.c1() : spec.c0();
}

struct MeteredGram::State {
  explicit State(std::size_t n, std::optional<std::uint64_t> budget_in)
      : budget(budget_in), per_row(n, 0) {
    const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n + 1) / 2;
    if (pairs <= kDensePairLimit) dense.assign(pairs, false);
    use_dense = pairs <= kDensePairLimit;
  }

  bool contains(std::uint64_t key) const {
    return use_dense ? static_cast<bool>(dense[key]) : sparse.contains(key);
  }
  void insert(std::uint64_t key) {
    if (use_dense) {
      dense[key] = true;
    } else {
      sparse.insert(key);
    }
  }

  mutable std::mutex mutex;
  std::optional<std::uint64_t> budget;
  std::uint64_t distinct = 0;
  std::uint64_t requests = 0;
  bool exhausted = false;
  std::vector<std::uint64_t> per_row;
  bool use_dense = true;
  std::vector<bool> dense;
  std::unordered_set<std::uint64_t> sparse;
};

MeteredGram::MeteredGram() : MeteredGram(PointMatrix(0, 0), KernelSpec::linear()) {}

MeteredGram::MeteredGram(PointMatrix points, KernelSpec spec, std::optional<std::uint64_t> budget)
    : MeteredGram(std::make_shared<const PointMatrix>(std::move(points)), spec, budget) {}

MeteredGram::MeteredGram(std::shared_ptr<const PointMatrix> points, KernelSpec spec,
                         std::optional<std::uint64_t> budget)
    : points_(std::move(points)),
      spec_(spec),
      state_(std::make_unique<State>(static_cast<std::size_t>(points_->rows()), budget)) {}

MeteredGram::MeteredGram(MeteredGram&&) noexcept = default;
MeteredGram& MeteredGram::operator=(MeteredGram&&) noexcept = default;
MeteredGram::~MeteredGram() = default;

std::size_t MeteredGram::size() const noexcept { return static_cast<std::size_t>(points_->rows()); }

const KernelSpec& MeteredGram::spec() const noexcept { return spec_; }

const PointMatrix& MeteredGram::hidden_points() const noexcept { return *points_; }

double MeteredGram::query(std::size_t i, std::size_t j) {
  const std::size_t n = size();
  if (i >= n || j >= n) {
    throw ContractViolation("query: index (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") out of range for n = " + std::to_string(n));
  }
  const std::uint64_t key = pair_key(i, j);
  {
    std::lock_guard lock(state_->mutex);
    State& s = *state_;
    if (!s.contains(key)) {
      if (s.budget && s.distinct >= *s.budget) {
        s.exhausted = true;
        throw BudgetExhausted("query budget of " + std::to_string(*s.budget) +
                              " distinct entries exhausted");
      }
      s.insert(key);
      ++s.distinct;
      ++s.per_row[i];
      if (i != j) ++s.per_row[j];
    }
    ++s.requests;
  }
  const auto cols = static_cast<std::size_t>(points_->cols());
  return kernel_eval(spec_, {points_->row(i).data(), cols}, {points_->row(j).data(), cols});
}

bool MeteredGram::is_revealed(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) return false;
  std::lock_guard lock(state_->mutex);
  return state_->contains(pair_key(i, j));
}

QueryReport MeteredGram::report() const {
  std::lock_guard lock(state_->mutex);
  return QueryReport{state_->distinct, state_->requests, state_->budget, state_->exhausted,
                     state_->per_row};
}

MeteredGram MeteredGram::fresh(std::optional<std::uint64_t> budget) const {
  return MeteredGram(points_, spec_, budget);
}

Eigen::MatrixXd reveal_all(MeteredGram& gram) {
  const auto n = static_cast<Eigen::Index>(gram.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = gram.query(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd reveal_block(MeteredGram& gram, std::span<const std::size_t> indices) {
  const auto t = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd k(t, t);
  for (Eigen::Index b = 0; b < t; ++b) {
    for (Eigen::Index a = 0; a <= b; ++a) {
      const double v = gram.query(indices[static_cast<std::size_t>(a)],
                                  indices[static_cast<std::size_t>(b)]);
      k(a, b) = v;
      k(b, a) = v;
    }
  }
  return k;
}

}  // namespace kbudget
