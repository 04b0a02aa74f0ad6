#include "kbudget/krr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kbudget {
namespace {

void require_symmetric(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols()) throw ContractViolation("kernel matrix must be square");
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw ContractViolation("kernel matrix is not symmetric");
  }
}

void require_positive_lambda(double lambda) {
  if (!(lambda > 0.0)) throw ContractViolation("lambda must be positive");
}

KrrSolution finish(const Eigen::MatrixXd& k, const Eigen::VectorXd& z, double lambda,
                   Eigen::VectorXd alpha) {
  KrrSolution s;
  const Eigen::VectorXd k_alpha = k * alpha;
  s.residual_norm = (k_alpha - z).norm();
  s.objective = s.residual_norm * s.residual_norm + lambda * alpha.dot(k_alpha);
  s.alpha = std::move(alpha);
  s.lambda = lambda;
  return s;
}

Eigen::LLT<Eigen::MatrixXd> regularized_llt(const Eigen::MatrixXd& k, double lambda) {
  Eigen::MatrixXd a = k;
  a.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalDegeneracy("K + lambda I is not positive definite");
  }
  return llt;
}

}  // namespace

KrrSolution solve_exact(const Eigen::MatrixXd& k, const Eigen::VectorXd& z, double lambda) {
  require_symmetric(k);
  require_positive_lambda(lambda);
  if (z.size() != k.rows()) throw ContractViolation("solve_exact: z has the wrong length");
  const auto llt = regularized_llt(k, lambda);
  return finish(k, z, lambda, llt.solve(z));
}

double d_eff(std::span<const double> eigenvalues, double lambda) {
  require_positive_lambda(lambda);
  double total = 0.0;
  for (const double s : eigenvalues) {
    if (s < 0.0) throw ContractViolation("d_eff: eigenvalues must be non-negative");
    total += s / (s + lambda);
  }
  return total;
}

double d_eff_from_gram(const Eigen::MatrixXd& k, double lambda) {
  require_symmetric(k);
  require_positive_lambda(lambda);
  const auto llt = regularized_llt(k, lambda);
  // trace((K + lambda I)^{-1}) = ||L^{-1}||_F^2
  Eigen::MatrixXd l_inv = Eigen::MatrixXd::Identity(k.rows(), k.cols());
  llt.matrixL().solveInPlace(l_inv);
  return static_cast<double>(k.rows()) - lambda * l_inv.squaredNorm();
}

SpectralApprox SpectralApprox::dense(Eigen::MatrixXd k_tilde) {
  require_symmetric(k_tilde);
  return SpectralApprox(std::move(k_tilde), false);
}

SpectralApprox SpectralApprox::low_rank(Eigen::MatrixXd factor) {
  return SpectralApprox(std::move(factor), true);
}

std::size_t SpectralApprox::size() const noexcept { return static_cast<std::size_t>(data_.rows()); }

Eigen::MatrixXd SpectralApprox::materialize() const {
  if (!low_rank_) return data_;
  return data_ * data_.transpose();
}

double SpectralApprox::certify(const Eigen::MatrixXd& k) {
  if (k.rows() != data_.rows() || k.cols() != data_.rows()) {
    throw ContractViolation("certify: size mismatch");
  }
  const Eigen::MatrixXd diff = k - materialize();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (diff + diff.transpose()),
                                                     Eigen::EigenvaluesOnly);
  bound_ = eig.eigenvalues().maxCoeff();
  return *bound_;
}

SpectralApprox nystrom_uniform(MeteredGram& gram, std::size_t columns, CounterRng& rng) {
  const std::size_t n = gram.size();
  columns = std::min(columns, n);
  // Partial Fisher-Yates: the first `columns` entries become the sample.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < columns; ++i) {
    std::swap(order[i], order[i + rng.uniform_index(n - i)]);
  }

  Eigen::MatrixXd c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns));
  std::size_t done = 0;
  try {
    for (; done < columns; ++done) {
      for (std::size_t i = 0; i < n; ++i) {
        c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(done)) =
            gram.query(i, order[done]);
      }
    }
  } catch (const BudgetExhausted&) {
    // keep the completed columns
  }
  c.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(done));

  Eigen::MatrixXd w(static_cast<Eigen::Index>(done), static_cast<Eigen::Index>(done));
  for (std::size_t a = 0; a < done; ++a) {
    for (std::size_t b = 0; b < done; ++b) {
      w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          c(static_cast<Eigen::Index>(order[a]), static_cast<Eigen::Index>(b));
    }
  }
  Eigen::MatrixXd factor(static_cast<Eigen::Index>(n), 0);
  if (done > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (w + w.transpose()));
    const Eigen::VectorXd& vals = eig.eigenvalues();
    const double cutoff = 1e-10 * std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      if (vals(i) > cutoff) keep.push_back(i);
    }
    factor.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
      factor.col(static_cast<Eigen::Index>(r)) =
          c * eig.eigenvectors().col(keep[r]) / std::sqrt(vals(keep[r]));
    }
  }
  SpectralApprox approx = SpectralApprox::low_rank(std::move(factor));
  approx.columns_read = done;
  return approx;
}

KrrSolution approx_solve_spectral(const SpectralApprox& approx, const Eigen::VectorXd& z,
                                  double lambda) {
  require_positive_lambda(lambda);
  if (static_cast<std::size_t>(z.size()) != approx.size()) {
    throw ContractViolation("approx_solve_spectral: z has the wrong length");
  }
  if (approx.is_low_rank()) {
    // Woodbury: (F F^T + lambda I)^{-1} z = (z - F (F^T F + lambda I)^{-1} F^T z) / lambda
    const Eigen::MatrixXd& f = approx.matrix();
    Eigen::MatrixXd small = f.transpose() * f;
    small.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(small);
    if (llt.info() != Eigen::Success) {
      throw ContractViolation("approx_solve_spectral: singular regularized system");
    }
    Eigen::VectorXd alpha = (z - f * llt.solve(f.transpose() * z)) / lambda;
    KrrSolution s;
    const Eigen::VectorXd k_alpha = f * (f.transpose() * alpha);
    s.residual_norm = (k_alpha - z).norm();
    s.objective = s.residual_norm * s.residual_norm + lambda * alpha.dot(k_alpha);
    s.alpha = std::move(alpha);
    s.lambda = lambda;
    return s;
  }
  Eigen::MatrixXd a = approx.matrix();
  a.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
    throw ContractViolation("approx_solve_spectral: singular regularized system");
  }
  return finish(approx.matrix(), z, lambda, ldlt.solve(z));
}

bool check_guarantee(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& alpha_opt,
                     double eps) {
  if (alpha_hat.size() != alpha_opt.size()) {
    throw ContractViolation("check_guarantee: length mismatch");
  }
  return (alpha_hat - alpha_opt).norm() <= eps * alpha_opt.norm();
}

Eigen::VectorXd hard_instance_opt(const KrrInstance& instance) {
  const double ridge = static_cast<double>(instance.n) / instance.k;
  const double gap = instance.spec.c1() - instance.spec.c0();
  // Rank-one correction 1/(1 + C) with C = c0/(c1 - c0) · sum_j n_j/(n_j + n/k).
  double correction = 1.0;
  if (instance.spec.c0() != 0.0) {
    double c = 0.0;
    for (const std::size_t nj : instance.counts) {
      c += static_cast<double>(nj) / (static_cast<double>(nj) + ridge);
    }
    c *= instance.spec.c0() / gap;
    correction = 1.0 / (1.0 + c);
  }
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(instance.total_points()));
  for (std::size_t i = 0; i < instance.n; ++i) {
    const double nj = static_cast<double>(instance.counts[instance.basis[i]]);
    alpha(static_cast<Eigen::Index>(i)) = correction / (gap * (nj + ridge));
  }
  for (std::size_t a = 0; a < instance.appended; ++a) {
    alpha(static_cast<Eigen::Index>(instance.n + a)) = 1.0 / (ridge * ridge + instance.lambda);
  }
  return alpha;
}

double classification_threshold(double eps) {
  return 0.5 * (1.0 / (1.0 + eps) + 1.0 / (1.0 + 2.0 * eps));
}

std::vector<KrrClass> classify_rows(const Eigen::VectorXd& alpha_hat, double n, double k,
                                    double eps) {
  const double threshold = classification_threshold(eps);
  const double scale = n / k;
  std::vector<KrrClass> labels(static_cast<std::size_t>(alpha_hat.size()));
  for (Eigen::Index i = 0; i < alpha_hat.size(); ++i) {
    labels[static_cast<std::size_t>(i)] =
        scale * alpha_hat(i) > threshold ? KrrClass::s1 : KrrClass::s2;
  }
  return labels;
}

KrrSolution indicator_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& z, double lambda,
                            double c0, double c1) {
  if (!(c1 > c0)) throw ContractViolation("indicator_solve: need c1 > c0");
  require_symmetric(g);
  require_positive_lambda(lambda);
  if (z.size() != g.rows()) throw ContractViolation("indicator_solve: z has the wrong length");
  const double gap = c1 - c0;
  const auto llt = regularized_llt(gap * g, lambda);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.rows());
  const Eigen::VectorXd a_inv_z = llt.solve(z);
  const Eigen::VectorXd a_inv_1 = llt.solve(ones);
  const double c = c0 * ones.dot(a_inv_1);
  if (std::abs(1.0 + c) < 1e-12) {
    throw NumericalDegeneracy("indicator_solve: rank-one update is singular (1 + C = 0)");
  }
  // (A + c0 11^T)^{-1} z = A^{-1} z - c0 (1^T A^{-1} z)/(1 + C) · A^{-1} 1
  Eigen::VectorXd alpha = a_inv_z - (c0 * ones.dot(a_inv_z) / (1.0 + c)) * a_inv_1;

  Eigen::MatrixXd k = gap * g;
  k.array() += c0;
  return finish(k, z, lambda, std::move(alpha));
}

}  // namespace kbudget
