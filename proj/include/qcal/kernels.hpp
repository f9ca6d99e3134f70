#pragma once

// Stationary kernels sigma_d^2 exp(-|t - t'|^gamma / (2 ell^gamma)), the
// analytical Mercer expansion of the squared-exponential kernel under a
// Gaussian measure, Woodbury algebra for U U^T + s^2 I, and top-r spectral
// partitions of dense covariances.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qcal/error.hpp"
#include "qcal/linalg.hpp"

namespace qcal {

struct KernelParams {
  double sigma_delta = 0.0;
  double ell = 1.0;
  double gamma = 2.0;

  void validate() const {
    if (!(sigma_delta >= 0.0)) throw DomainError("kernel: sigma_delta must be nonnegative");
    if (!(ell > 0.0)) throw DomainError("kernel: ell must be positive");
    if (!(gamma >= 1.0 && gamma <= 2.0)) throw DomainError("kernel: gamma must lie in [1, 2]");
  }
};

/// alpha = (1/sigma_eps^2, 1/sigma_delta^2, ell) with gamma fixed per run.
struct NoiseHypers {
  double inv_noise_var = 1.0;
  double inv_gp_var = 1.0;
  double ell = 1.0;
  double gamma = 2.0;

  double noise_var() const { return 1.0 / inv_noise_var; }
  double sigma_eps() const { return std::sqrt(noise_var()); }
  double sigma_delta() const { return std::sqrt(1.0 / inv_gp_var); }
  KernelParams kernel() const { return {sigma_delta(), ell, gamma}; }

  void validate() const {
    if (!(inv_noise_var > 0.0 && inv_gp_var > 0.0 && ell > 0.0))
      throw DomainError("noise hyper-parameters must be strictly positive");
    if (!(gamma >= 1.0 && gamma <= 2.0)) throw DomainError("kernel exponent must lie in [1, 2]");
  }
};

inline double kernel_eval(const KernelParams& kp, double t, double t2) {
  const double d = std::abs(t - t2);
  if (kp.gamma == 2.0) return kp.sigma_delta * kp.sigma_delta * std::exp(-0.5 * (d * d) / (kp.ell * kp.ell));
  if (kp.gamma == 1.0) return kp.sigma_delta * kp.sigma_delta * std::exp(-0.5 * d / kp.ell);
  return kp.sigma_delta * kp.sigma_delta * std::exp(-0.5 * std::pow(d / kp.ell, kp.gamma));
}

inline Eigen::MatrixXd build_cross_kernel(const KernelParams& kp, const Eigen::VectorXd& a,
                                          const Eigen::VectorXd& b) {
  Eigen::MatrixXd k(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j)
    for (Eigen::Index i = 0; i < a.size(); ++i) k(i, j) = kernel_eval(kp, a(i), b(j));
  return k;
}

inline Eigen::MatrixXd build_kernel_matrix(const KernelParams& kp, const Eigen::VectorXd& times) {
  const Eigen::Index n = times.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = kp.sigma_delta * kp.sigma_delta;
    for (Eigen::Index i = j + 1; i < n; ++i) k(i, j) = k(j, i) = kernel_eval(kp, times(i), times(j));
  }
  return k;
}

/// Eigenpairs of exp(-(t-t')^2 / (2 ell^2)) with respect to N(0, sigma^2).
/// Mode m (0-based) has eigenvalue sqrt(2/D) (beta/D)^m, D = 1 + beta + sqrt(1 + 2 beta).
class MercerExpansion {
 public:
  MercerExpansion(double measure_sigma, double ell, int rank)
      : sigma_(measure_sigma), ell_(ell), rank_(rank) {
    if (!(measure_sigma > 0.0)) throw DomainError("Mercer: measure sigma must be positive");
    if (!(ell > 0.0)) throw DomainError("Mercer: ell must be positive");
    if (rank < 1) throw DomainError("Mercer: rank must be at least 1");
    beta_ = 2.0 * sigma_ * sigma_ / (ell_ * ell_);
    root_ = std::sqrt(1.0 + 2.0 * beta_);
    denom_ = 1.0 + beta_ + root_;
    log_ratio_ = std::log(beta_) - std::log(denom_);
    const double log_floor = std::log(1e-300);
    if (log_eigenvalue(rank - 1) < log_floor) {
      int usable = 0;
      while (log_eigenvalue(usable) >= log_floor) ++usable;
      throw RankReductionError("Mercer rank " + std::to_string(rank) +
                                   " underflows double precision; max usable rank is " + std::to_string(usable),
                               usable);
    }
  }

  double measure_sigma() const { return sigma_; }
  double ell() const { return ell_; }
  int rank() const { return rank_; }
  double beta() const { return beta_; }
  /// lambda_{m+1} / lambda_m.
  double ratio() const { return beta_ / denom_; }

  double log_eigenvalue(int m) const { return 0.5 * std::log(2.0 / denom_) + m * log_ratio_; }
  double eigenvalue(int m) const { return std::exp(log_eigenvalue(m)); }

  Eigen::VectorXd eigenvalues() const {
    Eigen::VectorXd v(rank_);
    for (int m = 0; m < rank_; ++m) v(m) = eigenvalue(m);
    return v;
  }

  /// Row of phi_0..phi_{rank-1} at t, each scaled by exp(log_weight(m)).
  /// Hermite values use the normalized recurrence with a running log scale.
  template <typename Weight>
  void eval_row(double t, Weight&& log_weight, double* out) const {
    // sqrt(1 + 2 beta) - 1 without cancellation.
    const double gauss = 2.0 * beta_ / (root_ + 1.0) / (4.0 * sigma_ * sigma_);
    const double x = std::pow(0.25 + 0.5 * beta_, 0.25) * t / sigma_;
    const double base = 0.125 * std::log1p(2.0 * beta_) - gauss * t * t;
    double h_prev = 0.0;
    double h = 1.0;  // h_0
    double log_scale = 0.0;
    for (int m = 0; m < rank_; ++m) {
      if (m > 0) {
        const double next = x * std::sqrt(2.0 / m) * h - std::sqrt((m - 1.0) / m) * h_prev;
        h_prev = h;
        h = next;
        const double mag = std::abs(h);
        if (mag > 1e150) {
          h /= mag;
          h_prev /= mag;
          log_scale += std::log(mag);
        }
      }
      if (h == 0.0) {
        out[m] = 0.0;
      } else {
        out[m] = std::copysign(std::exp(std::log(std::abs(h)) + log_scale + base + log_weight(m)), h);
      }
    }
  }

  double eigenfunction(int m, double t) const {
    Eigen::VectorXd row(rank_);
    eval_row(t, [](int) { return 0.0; }, row.data());
    return row(m);
  }

 private:
  double sigma_;
  double ell_;
  int rank_;
  double beta_ = 0.0;
  double root_ = 1.0;
  double denom_ = 2.0;
  double log_ratio_ = 0.0;
};

inline MercerExpansion mercer_eigenpairs(const KernelParams& kp, double measure_sigma, int rank) {
  if (kp.gamma != 2.0) throw DomainError("Mercer expansion is only available for gamma = 2");
  return MercerExpansion(measure_sigma, kp.ell, rank);
}

/// Midpoint of the grid; eigenfunctions are evaluated at t - center.
inline double grid_center(const Eigen::VectorXd& times) {
  if (times.size() == 0) return 0.0;
  return 0.5 * (times.minCoeff() + times.maxCoeff());
}

/// Columns u_m = sigma_d sqrt(lambda_m) phi_m(t_i - center), so K ~ U U^T.
inline Eigen::MatrixXd low_rank_factor(const MercerExpansion& me, const KernelParams& kp,
                                       const Eigen::VectorXd& times) {
  if (kp.gamma != 2.0) throw DomainError("low-rank factor requires gamma = 2");
  const Eigen::Index n = times.size();
  const int r = me.rank();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, r);
  if (kp.sigma_delta == 0.0) return u;
  const double log_sd = std::log(kp.sigma_delta);
  const double center = grid_center(times);
  Eigen::VectorXd row(r);
  for (Eigen::Index i = 0; i < n; ++i) {
    me.eval_row(times(i) - center, [&](int m) { return log_sd + 0.5 * me.log_eigenvalue(m); }, row.data());
    u.row(i) = row.transpose();
  }
  return u;
}

inline double relative_frobenius_error(const Eigen::MatrixXd& k, const Eigen::MatrixXd& u) {
  const double denom = k.norm();
  if (denom == 0.0) return 0.0;
  return (k - u * u.transpose()).norm() / denom;
}

struct RankSelection {
  int rank;
  double error;
  bool adequate;
};

/// Smallest Mercer rank meeting `target` relative Frobenius error on the grid.
inline RankSelection select_mercer_rank(const KernelParams& kp, const Eigen::VectorXd& times,
                                        double measure_sigma, double target, int max_rank = 60) {
  const Eigen::MatrixXd k = build_kernel_matrix(kp, times);
  RankSelection best{0, 1.0, false};
  for (int r = 1; r <= max_rank; ++r) {
    try {
      const MercerExpansion me = mercer_eigenpairs(kp, measure_sigma, r);
      const double err = relative_frobenius_error(k, low_rank_factor(me, kp, times));
      best = {r, err, err < target};
      if (best.adequate) return best;
    } catch (const RankReductionError&) {
      break;
    }
  }
  return best;
}

/// (U U^T + s2 I)^{-1} x via s2^{-1} x - s2^{-2} U (I_r + s2^{-1} U^T U)^{-1} U^T x.
inline Eigen::VectorXd woodbury_solve(const Eigen::MatrixXd& u, double sigma_eps2, const Eigen::VectorXd& x) {
  if (!(sigma_eps2 > 0.0)) throw DomainError("woodbury_solve: noise variance must be positive");
  if (u.cols() == 0) return x / sigma_eps2;
  const Eigen::Index r = u.cols();
  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(r, r);
  inner.selfadjointView<Eigen::Lower>().rankUpdate(u.transpose(), 1.0 / sigma_eps2);
  Eigen::LLT<Eigen::MatrixXd> llt(inner.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) throw NumericalError("woodbury_solve: inner system is singular");
  const Eigen::VectorXd y = llt.solve(u.transpose() * x);
  return x / sigma_eps2 - (u * y) / (sigma_eps2 * sigma_eps2);
}

/// log |U U^T + s2 I| from the singular values of U.
inline double low_rank_logdet(const Eigen::MatrixXd& u, double sigma_eps2) {
  if (!(sigma_eps2 > 0.0)) throw DomainError("low_rank_logdet: noise variance must be positive");
  const double n = static_cast<double>(u.rows());
  if (u.cols() == 0 || u.rows() == 0) return n * std::log(sigma_eps2);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(u);
  const Eigen::VectorXd s = svd.singularValues();
  double acc = (n - static_cast<double>(s.size())) * std::log(sigma_eps2);
  for (Eigen::Index j = 0; j < s.size(); ++j) acc += std::log(s(j) * s(j) + sigma_eps2);
  return acc;
}

struct EigenPartition {
  Eigen::VectorXd lambda_i;  // retained eigenvalues, descending
  Eigen::MatrixXd e_i;       // n x r orthonormal block
  int n = 0;
  int r = 0;
};

inline void require_symmetric(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols()) throw DomainError(std::string(who) + ": matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError(std::string(who) + ": matrix is not symmetric");
}

inline EigenPartition eigen_partition(const Eigen::MatrixXd& sigma, int r) {
  require_symmetric(sigma, "eigen_partition");
  const int n = static_cast<int>(sigma.rows());
  if (r < 1 || r > n) throw DomainError("eigen_partition: need 1 <= r <= n");
  TopEigen top = top_symmetric_eigenpairs(sigma, r);
  if (!(top.values.minCoeff() > 0.0))
    throw DegenerateCovarianceError("eigen_partition: retained eigenvalue is not positive", top.values.minCoeff());
  return {std::move(top.values), std::move(top.vectors), n, r};
}

/// Retains every eigenpair with lambda_j >= rel_floor * lambda_1.
inline EigenPartition eigen_partition_auto(const Eigen::MatrixXd& sigma, double rel_floor = 1e-10) {
  require_symmetric(sigma, "eigen_partition_auto");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd w = es.eigenvalues();
  const double top = w.maxCoeff();
  int r = 0;
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (w(j) >= rel_floor * top) ++r;
  return eigen_partition(sigma, std::max(r, 1));
}

}  // namespace qcal
