#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kbudget/instances.hpp"
#include "kbudget/oracle.hpp"
#include "kbudget/rng.hpp"

namespace kbudget {

struct KrrSolution {
  Eigen::VectorXd alpha;
  double lambda = 0.0;
  /// ||K alpha - z||
  double residual_norm = 0.0;
  /// ||K alpha - z||^2 + lambda alpha^T K alpha
  double objective = 0.0;
};

/// alpha = (K + lambda I)^{-1} z via a Cholesky factorization.
/// Throws ContractViolation if K is not symmetric to 1e-8 or lambda <= 0, and
/// NumericalDegeneracy if K + lambda I is not positive definite.
KrrSolution solve_exact(const Eigen::MatrixXd& k, const Eigen::VectorXd& z, double lambda);

/// sum_i s_i / (s_i + lambda) over the eigenvalues s_i of K.
double d_eff(std::span<const double> eigenvalues, double lambda);
/// trace(K (K + lambda I)^{-1}), computed as n - lambda * ||L^{-1}||_F^2.
double d_eff_from_gram(const Eigen::MatrixXd& k, double lambda);

/// An approximation K~ of a kernel matrix, either dense or as K~ = F F^T.
///
/// `certify` records b = lambda_max(K - K~) against a fully revealed K; the
/// approximate solve is guaranteed (1+eps)-accurate whenever b <= lambda*eps.
class SpectralApprox {
 public:
  static SpectralApprox dense(Eigen::MatrixXd k_tilde);
  static SpectralApprox low_rank(Eigen::MatrixXd factor);

  std::size_t size() const noexcept;
  bool is_low_rank() const noexcept { return low_rank_; }
  const Eigen::MatrixXd& matrix() const noexcept { return data_; }
  Eigen::MatrixXd materialize() const;

  double certify(const Eigen::MatrixXd& k);
  std::optional<double> bound() const noexcept { return bound_; }

  /// Kernel columns read while building (0 for dense approximations).
  std::size_t columns_read = 0;

 private:
  SpectralApprox(Eigen::MatrixXd data, bool low_rank) : data_(std::move(data)), low_rank_(low_rank) {}

  Eigen::MatrixXd data_;
  bool low_rank_;
  std::optional<double> bound_;
};

/// Nystrom approximation C W^+ C^T from up to `columns` distinct uniformly
/// sampled kernel columns. Reads whole columns through the oracle; if the
/// budget runs out mid-column, that column is dropped and the columns already
/// completed are used.
SpectralApprox nystrom_uniform(MeteredGram& gram, std::size_t columns, CounterRng& rng);

/// alpha^ = (K~ + lambda I)^{-1} z.
KrrSolution approx_solve_spectral(const SpectralApprox& approx, const Eigen::VectorXd& z,
                                  double lambda);

/// ||alpha_hat - alpha_opt|| <= eps ||alpha_opt||.
bool check_guarantee(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& alpha_opt,
                     double eps);

/// Optimum of the hard instance from its counts, without touching the Gram:
/// alpha_i = 1/(n_{j_i} + n/k) for the linear kernel, scaled by the rank-one
/// correction for indicator kernels; appended points get 1/((n/k)^2 + lambda).
Eigen::VectorXd hard_instance_opt(const KrrInstance& instance);

/// Midpoint of 1/(1+eps) and 1/(1+2eps).
double classification_threshold(double eps);

/// Labels row i S1 when (n/k)·alpha_hat_i exceeds the threshold, else S2.
std::vector<KrrClass> classify_rows(const Eigen::VectorXd& alpha_hat, double n, double k,
                                    double eps);

/// KRR with the indicator kernel K = c0·11^T + (c1 - c0)·G, solved through the
/// rank-one (Sherman-Morrison) update of ((c1 - c0) G + lambda I). Throws
/// NumericalDegeneracy when the update denominator vanishes.
KrrSolution indicator_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& z, double lambda,
                            double c0, double c1);

}  // namespace kbudget
