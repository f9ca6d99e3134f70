#pragma once

// Gaussian predictive distribution of model plus discrepancy at test times,
// conditioned on training residuals. Case I: fixed theta. Case II: theta
// drawn from a posterior ensemble, moments estimated by Monte Carlo.

#include <Eigen/Dense>

#include <random>

#include "qcal/error.hpp"
#include "qcal/inference.hpp"
#include "qcal/kernels.hpp"
#include "qcal/linalg.hpp"

namespace qcal {

inline constexpr double kZ975 = 1.959963984540054;

struct PredictiveGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd test_times;
};

struct TrainingSet {
  Eigen::VectorXd times;
  Eigen::VectorXd observations;
};

/// Deterministic hyper-parameters (posterior means).
struct HatHypers {
  double sigma_eps = 0.0;
  double sigma_delta = 0.0;
  double ell = 1.0;
  double gamma = 2.0;

  KernelParams kernel() const { return {sigma_delta, ell, gamma}; }
};

/// Simulated curves of an ensemble, one row per theta sample.
struct ThetaEnsemble {
  Eigen::MatrixXd train;  // m x n
  Eigen::MatrixXd test;   // m x n*

  void validate() const {
    if (train.rows() < 2) throw DomainError("theta ensemble needs at least two members");
    if (test.rows() != train.rows()) throw DomainError("theta ensemble: train and test member counts differ");
  }
};

namespace detail {

// Conditions prior (mean_test, cov_test) on residual r with training covariance
// sigma_train and train/test cross covariance cross (n x n*).
inline PredictiveGaussian condition(const Eigen::VectorXd& mean_test, const Eigen::MatrixXd& cov_test,
                                    const Eigen::MatrixXd& sigma_train, const Eigen::MatrixXd& cross,
                                    const Eigen::VectorXd& residual, const Eigen::VectorXd& test_times) {
  PredictiveGaussian pg;
  pg.test_times = test_times;
  if (residual.size() == 0) {
    pg.mean = mean_test;
    pg.covariance = psd_floor(cov_test);
    return pg;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_train);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma_train);
    const double pivot = ldlt.vectorD().minCoeff();
    throw DegenerateCovarianceError("predictive conditioning: training covariance is not positive definite",
                                    pivot);
  }
  // A^T = Sigma^{-1} cross
  const Eigen::MatrixXd at = llt.solve(cross);
  pg.mean = mean_test + at.transpose() * residual;
  pg.covariance = psd_floor(cov_test - at.transpose() * cross);
  return pg;
}

inline Eigen::MatrixXd sample_cross_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd ac = a.rowwise() - a.colwise().mean();
  const Eigen::MatrixXd bc = b.rowwise() - b.colwise().mean();
  return ac.transpose() * bc / static_cast<double>(a.rows() - 1);
}

}  // namespace detail

/// Case I: f_train, f_test are the model outputs at the fixed theta.
inline PredictiveGaussian predict_case1(const Eigen::VectorXd& f_train, const Eigen::VectorXd& f_test,
                                        const TrainingSet& train, const Eigen::VectorXd& test_times,
                                        const HatHypers& hat) {
  if (f_train.size() != train.times.size() || train.observations.size() != train.times.size())
    throw DomainError("predict_case1: training sizes disagree");
  if (f_test.size() != test_times.size()) throw DomainError("predict_case1: test sizes disagree");
  const KernelParams kp = hat.kernel();
  Eigen::MatrixXd sigma = build_kernel_matrix(kp, train.times);
  sigma.diagonal().array() += hat.sigma_eps * hat.sigma_eps;
  return detail::condition(f_test, build_kernel_matrix(kp, test_times), sigma,
                           build_cross_kernel(kp, train.times, test_times), train.observations - f_train,
                           test_times);
}

/// Case II with unbiased (1/(m-1)) ensemble covariances.
inline PredictiveGaussian predict_case2(const ThetaEnsemble& ens, const TrainingSet& train,
                                        const Eigen::VectorXd& test_times, const HatHypers& hat) {
  ens.validate();
  if (ens.train.cols() != train.times.size() || train.observations.size() != train.times.size())
    throw DomainError("predict_case2: training sizes disagree");
  if (ens.test.cols() != test_times.size()) throw DomainError("predict_case2: test sizes disagree");
  const KernelParams kp = hat.kernel();
  const Eigen::VectorXd fbar = ens.train.colwise().mean().transpose();
  const Eigen::VectorXd fbar_test = ens.test.colwise().mean().transpose();

  Eigen::MatrixXd sigma = detail::sample_cross_cov(ens.train, ens.train) + build_kernel_matrix(kp, train.times);
  sigma.diagonal().array() += hat.sigma_eps * hat.sigma_eps;
  const Eigen::MatrixXd cross =
      detail::sample_cross_cov(ens.train, ens.test) + build_cross_kernel(kp, train.times, test_times);
  const Eigen::MatrixXd cov_test = detail::sample_cross_cov(ens.test, ens.test) + build_kernel_matrix(kp, test_times);
  return detail::condition(fbar_test, cov_test, sigma, cross, train.observations - fbar, test_times);
}

/// Ensemble spread alone: no discrepancy term and no conditioning on residuals.
inline PredictiveGaussian model_only_predictive(const Eigen::MatrixXd& test_curves, const Eigen::VectorXd& test_times) {
  if (test_curves.rows() < 2) throw DomainError("model-only prediction needs at least two ensemble members");
  PredictiveGaussian pg;
  pg.test_times = test_times;
  pg.mean = test_curves.colwise().mean().transpose();
  pg.covariance = psd_floor(detail::sample_cross_cov(test_curves, test_curves));
  return pg;
}

/// count x n* draws mean + S z with S the symmetric square root of the covariance.
inline Eigen::MatrixXd sample_realizations(const PredictiveGaussian& pg, int count, Rng& rng) {
  if (count < 0) throw DomainError("realization count must be nonnegative");
  const Eigen::Index n = pg.mean.size();
  const Eigen::MatrixXd s = psd_sqrt(pg.covariance);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(count, n);
  Eigen::VectorXd z(n);
  for (int k = 0; k < count; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    out.row(k) = (pg.mean + s * z).transpose();
  }
  return out;
}

struct Band {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Pointwise central 95% band; extra_var adds measurement noise.
inline Band pointwise_band(const PredictiveGaussian& pg, double extra_var = 0.0) {
  const Eigen::VectorXd sd = (pg.covariance.diagonal().array().max(0.0) + extra_var).sqrt();
  return {pg.mean - kZ975 * sd, pg.mean + kZ975 * sd};
}

inline double band_coverage(const Band& band, const Eigen::VectorXd& y) {
  if (y.size() != band.lower.size()) throw DomainError("band coverage: size mismatch");
  if (y.size() == 0) return 0.0;
  Eigen::Index hit = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) hit += (y(i) >= band.lower(i) && y(i) <= band.upper(i)) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

}  // namespace qcal
