#include "kbudget/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kbudget/rng.hpp"

namespace kbudget {
namespace {

// Substream tags, one per generator.
constexpr std::uint64_t kTagKrr = 1;
constexpr std::uint64_t kTagRank = 2;
constexpr std::uint64_t kTagKkmc = 3;
constexpr std::uint64_t kTagMog = 4;

PointMatrix basis_points(std::span<const std::size_t> basis, std::size_t dim) {
  PointMatrix x = PointMatrix::Zero(static_cast<Eigen::Index>(basis.size()),
                                    static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(basis[i])) = 1.0;
  }
  return x;
}

void check_krr_shape(std::size_t n, std::size_t J, double epsilon) {
  if (J == 0 || J % 4 != 0) throw ContractViolation("gen_krr: J must be a positive multiple of 4");
  if (n == 0) throw ContractViolation("gen_krr: n must be positive");
  if (!(epsilon > 0.0)) throw ContractViolation("gen_krr: epsilon must be positive");
}

KrrInstance assemble_krr(std::size_t n, std::size_t J, double epsilon, bool augmented,
                         KernelSpec spec, std::vector<std::size_t> basis) {
  KrrInstance inst;
  inst.n = n;
  inst.J = J;
  inst.epsilon = epsilon;
  inst.k = epsilon * static_cast<double>(J);
  inst.lambda = (spec.c1() - spec.c0()) * static_cast<double>(n) / inst.k;
  inst.augmented = augmented;
  inst.spec = spec;

  const std::size_t slots = 3 * J / 4;
  inst.counts.assign(slots, 0);
  inst.classes.reserve(n);
  for (const std::size_t b : basis) {
    ++inst.counts[b];
    inst.classes.push_back(krr_class_of(b, J));
  }

  std::size_t dim = slots;
  if (augmented) {
    if (spec.kind() != KernelKind::linear) {
      throw ContractViolation("gen_krr: the augmented instance is defined for the linear kernel");
    }
    const double rounded = std::round(inst.k);
    if (rounded < 1.0 || std::abs(rounded - inst.k) > 1e-9) {
      throw ContractViolation("gen_krr: augmented instance needs k = epsilon*J integral");
    }
    inst.appended = static_cast<std::size_t>(rounded);
    dim += inst.appended;
  }

  PointMatrix x = basis_points(basis, dim);
  if (augmented) {
    x.conservativeResize(static_cast<Eigen::Index>(n + inst.appended), Eigen::NoChange);
    x.bottomRows(static_cast<Eigen::Index>(inst.appended)).setZero();
    const double scale = static_cast<double>(n) / inst.k;
    for (std::size_t a = 0; a < inst.appended; ++a) {
      x(static_cast<Eigen::Index>(n + a), static_cast<Eigen::Index>(slots + a)) = scale;
    }
  }
  inst.z = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n + inst.appended));
  inst.basis = std::move(basis);

  if (J * J > n) {
    inst.advisories.push_back("J^2 = " + std::to_string(J * J) + " exceeds n = " +
                              std::to_string(n) + "; count concentration is not guaranteed");
  }
  inst.gram = MeteredGram(std::move(x), spec);
  return inst;
}

}  // namespace

KrrInstance gen_krr(const KrrParams& params) {
  check_krr_shape(params.n, params.J, params.epsilon);
  CounterRng rng = CounterRng(params.seed, streams::kInstance).substream(kTagKrr);
  const std::size_t half = params.J / 2;
  const std::size_t quarter = params.J / 4;
  std::vector<std::size_t> basis(params.n);
  for (auto& b : basis) {
    // Class first (fair coin), then a uniform member of that class.
    if (rng.uniform01() < 0.5) {
      b = rng.uniform_index(half);
    } else {
      b = half + rng.uniform_index(quarter);
    }
  }
  return assemble_krr(params.n, params.J, params.epsilon, params.augmented, params.spec,
                      std::move(basis));
}

KrrInstance krr_from_counts(std::span<const std::size_t> counts, std::size_t J, double epsilon,
                            KernelSpec spec) {
  if (counts.size() != 3 * J / 4) {
    throw ContractViolation("krr_from_counts: need one count per basis slot (3J/4)");
  }
  std::vector<std::size_t> basis;
  for (std::size_t j = 0; j < counts.size(); ++j) basis.insert(basis.end(), counts[j], j);
  check_krr_shape(basis.size(), J, epsilon);
  return assemble_krr(basis.size(), J, epsilon, false, spec, std::move(basis));
}

RankInstance gen_rank(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1 || n <= k) throw ContractViolation("gen_rank: need n > k >= 1");
  CounterRng rng = CounterRng(seed, streams::kInstance).substream(kTagRank);
  RankInstance inst;
  inst.n = n;
  inst.k = k;
  inst.basis.resize(n);
  for (auto& b : inst.basis) b = rng.uniform_index(k);
  if (rng.uniform01() < 0.5) {
    const std::size_t star = rng.uniform_index(n);
    inst.basis[star] = k;
    inst.planted = true;
    inst.planted_index = star;
  }
  inst.gram = MeteredGram(basis_points(inst.basis, k + 1), KernelSpec::linear());
  return inst;
}

std::size_t block_width_of(double epsilon) {
  if (!(epsilon > 0.0)) throw ContractViolation("epsilon must be positive");
  const double inv = 1.0 / epsilon;
  const double rounded = std::round(inv);
  if (std::abs(inv - rounded) > 1e-9 * std::max(1.0, inv) || rounded < 2.0) {
    throw ContractViolation("1/epsilon must be an integer >= 2 (got " + std::to_string(inv) + ")");
  }
  return static_cast<std::size_t>(rounded);
}

namespace {

KkmcInstance assemble_kkmc(std::size_t k, double epsilon, std::size_t width,
                           std::vector<std::size_t> blocks,
                           std::vector<std::pair<std::size_t, std::size_t>> pairs) {
  KkmcInstance inst;
  inst.n = blocks.size();
  inst.k = k;
  inst.epsilon = epsilon;
  inst.block_width = width;
  PointMatrix x = PointMatrix::Zero(static_cast<Eigen::Index>(inst.n),
                                    static_cast<Eigen::Index>(k * width));
  const double entry = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < inst.n; ++i) {
    const std::size_t offset = blocks[i] * width;
    x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(offset + pairs[i].first)) = entry;
    x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(offset + pairs[i].second)) = entry;
  }
  inst.blocks = std::move(blocks);
  inst.pairs = std::move(pairs);
  const std::size_t types = k * inst.types_per_block();
  if (10 * types > inst.n) {
    inst.advisories.push_back("k*C(1/eps,2) = " + std::to_string(types) +
                              " is not small against n = " + std::to_string(inst.n));
  }
  inst.gram = MeteredGram(std::move(x), KernelSpec::linear());
  return inst;
}

// Maps a rank in [0, C(w,2)) to the unordered pair (a < b), lexicographic.
std::pair<std::size_t, std::size_t> pair_from_rank(std::size_t rank, std::size_t width) {
  std::size_t a = 0;
  std::size_t row = width - 1;
  while (rank >= row) {
    rank -= row;
    ++a;
    --row;
  }
  return {a, a + 1 + rank};
}

}  // namespace

KkmcInstance gen_kkmc(std::size_t n, std::size_t k, double epsilon, std::uint64_t seed) {
  const std::size_t width = block_width_of(epsilon);
  if (k < 1) throw ContractViolation("gen_kkmc: k must be >= 1");
  CounterRng rng = CounterRng(seed, streams::kInstance).substream(kTagKkmc);
  const std::size_t types = width * (width - 1) / 2;
  std::vector<std::size_t> blocks(n);
  std::vector<std::pair<std::size_t, std::size_t>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) {
    blocks[i] = rng.uniform_index(k);
    pairs[i] = pair_from_rank(rng.uniform_index(types), width);
  }
  return assemble_kkmc(k, epsilon, width, std::move(blocks), std::move(pairs));
}

KkmcInstance gen_kkmc_balanced(std::size_t k, double epsilon, std::size_t copies,
                               std::uint64_t seed) {
  const std::size_t width = block_width_of(epsilon);
  if (k < 1 || copies < 1) throw ContractViolation("gen_kkmc_balanced: k, copies must be >= 1");
  const std::size_t types = width * (width - 1) / 2;
  std::vector<std::size_t> order(k * types * copies);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng = CounterRng(seed, streams::kInstance).substream(kTagKkmc).substream(copies);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  std::vector<std::size_t> blocks;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  blocks.reserve(order.size());
  pairs.reserve(order.size());
  for (const std::size_t slot : order) {
    const std::size_t type = slot / copies;
    blocks.push_back(type / types);
    pairs.push_back(pair_from_rank(type % types, width));
  }
  return assemble_kkmc(k, epsilon, width, std::move(blocks), std::move(pairs));
}

std::size_t block_of(const KkmcInstance& instance, std::size_t i) {
  if (i >= instance.n) throw ContractViolation("block_of: index out of range");
  return instance.blocks[i];
}

MogInstance gen_mog(const MogParams& params) {
  if (params.n == 0 || params.d == 0 || params.k == 0) {
    throw ContractViolation("gen_mog: n, d, k must be positive");
  }
  if (params.sigma < 0.0 || params.separation < 0.0) {
    throw ContractViolation("gen_mog: sigma and separation must be non-negative");
  }
  CounterRng rng = CounterRng(params.seed, streams::kInstance).substream(kTagMog);
  const auto d = static_cast<Eigen::Index>(params.d);
  const auto k = static_cast<Eigen::Index>(params.k);

  Eigen::MatrixXd means(k, d);
  if (params.k <= params.d) {
    Eigen::MatrixXd g(d, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      for (Eigen::Index r = 0; r < d; ++r) g(r, c) = rng.normal();
    }
    const Eigen::MatrixXd q = g.householderQr().householderQ() * Eigen::MatrixXd::Identity(d, k);
    means = params.separation * q.transpose();
  } else {
    // More components than dimensions: rejection-sample in a cube whose side
    // grows with the packing requirement.
    const double side = params.separation * std::pow(static_cast<double>(params.k),
                                                     1.0 / static_cast<double>(params.d)) * 4.0;
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      for (Eigen::Index c = 0; c < k; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) means(c, r) = side * (rng.uniform01() - 0.5);
      }
      placed = true;
      for (Eigen::Index a = 0; a < k && placed; ++a) {
        for (Eigen::Index b = a + 1; b < k && placed; ++b) {
          placed = (means.row(a) - means.row(b)).norm() >= params.separation;
        }
      }
    }
    if (!placed) {
      throw GenerationFailure("gen_mog: could not place " + std::to_string(params.k) +
                              " means with separation " + std::to_string(params.separation) +
                              " in dimension " + std::to_string(params.d));
    }
  }

  MogInstance inst;
  inst.n = params.n;
  inst.d = params.d;
  inst.k = params.k;
  inst.sigma = params.sigma;
  inst.separation = params.separation;
  inst.means = means;
  inst.weights = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(params.k));
  inst.labels.resize(params.n);
  PointMatrix x(static_cast<Eigen::Index>(params.n), d);
  for (std::size_t i = 0; i < params.n; ++i) {
    const std::size_t label = rng.uniform_index(params.k);
    inst.labels[i] = label;
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index c = 0; c < d; ++c) {
      x(row, c) = means(static_cast<Eigen::Index>(label), c) + params.sigma * rng.normal();
    }
  }
  inst.gram = MeteredGram(std::move(x), KernelSpec::linear());
  return inst;
}

std::string to_string(InstanceType type) {
  switch (type) {
    case InstanceType::krr: return "krr";
    case InstanceType::rank: return "rank";
    case InstanceType::kkmc: return "kkmc";
    case InstanceType::mog: return "mog";
  }
  return "unknown";
}

InstanceType instance_type_from_string(const std::string& name) {
  if (name == "krr") return InstanceType::krr;
  if (name == "rank") return InstanceType::rank;
  if (name == "kkmc") return InstanceType::kkmc;
  if (name == "mog") return InstanceType::mog;
  throw ContractViolation("unknown instance type '" + name + "'");
}

}  // namespace kbudget
