#pragma once

// Gaussian log-likelihoods of residuals x = y - f(theta) under
// Sigma(alpha) = K + sigma_eps^2 I, evaluated through one of several backends,
// and the joint likelihood of the two Ramsey experiments.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <deque>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "qcal/error.hpp"
#include "qcal/kernels.hpp"
#include "qcal/ramsey.hpp"

namespace qcal {

inline const double kLog2Pi = std::log(2.0 * std::numbers::pi);

namespace detail {

struct CholeskyResult {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet;
};

// Cholesky with a relative pivot floor of n * eps * max(diag).
inline CholeskyResult checked_cholesky(const Eigen::MatrixXd& sigma) {
  const Eigen::Index n = sigma.rows();
  if (n > 2000) throw DomainError("dense likelihood is limited to n <= 2000");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const double max_diag = sigma.diagonal().cwiseAbs().maxCoeff();
  const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    const double pivot = ldlt.vectorD().minCoeff();
    throw DegenerateCovarianceError("degenerate covariance: smallest pivot " + std::to_string(pivot), pivot);
  }
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  const double smallest = diag.minCoeff() * diag.minCoeff();
  if (!(smallest > floor))
    throw DegenerateCovarianceError("degenerate covariance: smallest pivot " + std::to_string(smallest), smallest);
  return {std::move(llt), 2.0 * diag.array().log().sum()};
}

}  // namespace detail

/// -n/2 log 2pi - 1/2 log|Sigma| - 1/2 x^T Sigma^{-1} x by Cholesky.
inline double loglik_direct(const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != x.size() || sigma.cols() != x.size())
    throw DomainError("loglik_direct: dimension mismatch");
  const auto chol = detail::checked_cholesky(sigma);
  const Eigen::VectorXd z = chol.llt.matrixL().solve(x);
  return -0.5 * static_cast<double>(x.size()) * kLog2Pi - 0.5 * chol.logdet - 0.5 * z.squaredNorm();
}

/// Sigma = s2 I in closed form.
inline double loglik_noise_only(const Eigen::VectorXd& x, double sigma_eps2) {
  if (!(sigma_eps2 > 0.0)) throw DomainError("noise variance must be positive");
  const double n = static_cast<double>(x.size());
  return -0.5 * n * kLog2Pi - 0.5 * n * std::log(sigma_eps2) - 0.5 * x.squaredNorm() / sigma_eps2;
}

/// Precomputed Woodbury state for U U^T + s2 I; evaluation is O(n r).
class LowRankCovariance {
 public:
  LowRankCovariance(Eigen::MatrixXd u, double sigma_eps2) : u_(std::move(u)), s2_(sigma_eps2) {
    if (!(sigma_eps2 > 0.0)) throw DomainError("low-rank covariance: noise variance must be positive");
    logdet_ = low_rank_logdet(u_, s2_);
    const Eigen::Index r = u_.cols();
    if (r > 0) {
      Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(r, r);
      inner.noalias() += (u_.transpose() * u_) / s2_;
      inner_.compute(inner);
      if (inner_.info() != Eigen::Success) throw NumericalError("low-rank covariance: inner system is singular");
    }
  }

  double logdet() const { return logdet_; }
  const Eigen::MatrixXd& factor() const { return u_; }
  double noise_var() const { return s2_; }

  /// x^T (U U^T + s2 I)^{-1} x.
  double quadratic(const Eigen::VectorXd& x) const {
    double q = x.squaredNorm() / s2_;
    if (u_.cols() > 0) {
      const Eigen::VectorXd ut_x = u_.transpose() * x;
      q -= ut_x.dot(inner_.solve(ut_x)) / (s2_ * s2_);
    }
    return q;
  }

  double loglik(const Eigen::VectorXd& x) const {
    if (x.size() != u_.rows()) throw DomainError("low-rank likelihood: dimension mismatch");
    return -0.5 * static_cast<double>(x.size()) * kLog2Pi - 0.5 * logdet_ - 0.5 * quadratic(x);
  }

 private:
  Eigen::MatrixXd u_;
  double s2_;
  double logdet_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> inner_;
};

inline double loglik_lowrank(const Eigen::VectorXd& x, const NoiseHypers& hypers, const MercerExpansion& me,
                             const Eigen::VectorXd& times) {
  if (hypers.gamma != 2.0) throw DomainError("low-rank likelihood requires gamma = 2");
  return LowRankCovariance(low_rank_factor(me, hypers.kernel(), times), hypers.noise_var()).loglik(x);
}

/// Likelihood restricted to the retained eigen-subspace.
inline double loglik_marginal(const Eigen::VectorXd& x, const EigenPartition& part) {
  if (x.size() != part.n) throw DomainError("marginal likelihood: dimension mismatch");
  const Eigen::VectorXd proj = part.e_i.transpose() * x;
  const double quad = (proj.array().square() / part.lambda_i.array()).sum();
  return -0.5 * part.r * kLog2Pi - 0.5 * part.lambda_i.array().log().sum() - 0.5 * quad;
}

enum class BackendKind { noise_only, direct, lowrank, marginal };

struct BackendSettings {
  BackendKind kind = BackendKind::noise_only;
  double gamma = 2.0;
  int lowrank_rank = 5;
  double measure_sigma = 0.01;
  int marginal_rank = 25;
  bool marginal_auto = false;
  double marginal_floor = 1e-10;
};

struct DirectFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet;
};
struct NoiseFactor {
  double noise_var;
};

/// alpha-dependent factorization of Sigma(alpha), immutable once built.
class CovarianceFactor {
 public:
  using Storage = std::variant<NoiseFactor, DirectFactor, LowRankCovariance, EigenPartition>;

  explicit CovarianceFactor(Storage s) : s_(std::move(s)) {}

  double loglik(const Eigen::VectorXd& x) const {
    return std::visit(
        [&](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, NoiseFactor>) {
            return loglik_noise_only(x, f.noise_var);
          } else if constexpr (std::is_same_v<T, DirectFactor>) {
            const Eigen::VectorXd z = f.llt.matrixL().solve(x);
            return -0.5 * static_cast<double>(x.size()) * kLog2Pi - 0.5 * f.logdet - 0.5 * z.squaredNorm();
          } else if constexpr (std::is_same_v<T, LowRankCovariance>) {
            return f.loglik(x);
          } else {
            return loglik_marginal(x, f);
          }
        },
        s_);
  }

  const Storage& storage() const { return s_; }

 private:
  Storage s_;
};

inline std::shared_ptr<const CovarianceFactor> build_factor(const BackendSettings& bs, const NoiseHypers& h,
                                                            const Eigen::VectorXd& times) {
  h.validate();
  switch (bs.kind) {
    case BackendKind::noise_only:
      return std::make_shared<CovarianceFactor>(NoiseFactor{h.noise_var()});
    case BackendKind::direct: {
      Eigen::MatrixXd sigma = build_kernel_matrix(h.kernel(), times);
      sigma.diagonal().array() += h.noise_var();
      auto chol = detail::checked_cholesky(sigma);
      return std::make_shared<CovarianceFactor>(DirectFactor{std::move(chol.llt), chol.logdet});
    }
    case BackendKind::lowrank: {
      if (h.gamma != 2.0) throw ConfigError("low-rank backend requires gamma = 2");
      const MercerExpansion me = mercer_eigenpairs(h.kernel(), bs.measure_sigma, bs.lowrank_rank);
      return std::make_shared<CovarianceFactor>(
          LowRankCovariance(low_rank_factor(me, h.kernel(), times), h.noise_var()));
    }
    case BackendKind::marginal: {
      Eigen::MatrixXd sigma = build_kernel_matrix(h.kernel(), times);
      sigma.diagonal().array() += h.noise_var();
      if (bs.marginal_auto) return std::make_shared<CovarianceFactor>(eigen_partition_auto(sigma, bs.marginal_floor));
      return std::make_shared<CovarianceFactor>(
          eigen_partition(sigma, std::min<int>(bs.marginal_rank, static_cast<int>(times.size()))));
    }
  }
  throw ConfigError("unknown likelihood backend");
}

/// Components entering the likelihood: {p0, p1} for 0<->1 and {p1, p2} for 1<->2.
inline std::array<int, 2> included_components(Transition e) {
  return e == Transition::t01 ? std::array<int, 2>{0, 1} : std::array<int, 2>{1, 2};
}

/// theta = (omega01, omega12-, omega12+, T2,1, T2,2) in internal units.
using ThetaVector = Eigen::Matrix<double, 5, 1>;

inline DeviceParams apply_theta(DeviceParams base, const ThetaVector& theta) {
  base.omega01 = theta(0);
  base.omega12_minus = theta(1);
  base.omega12_plus = theta(2);
  base.t2_1 = theta(3);
  base.t2_2 = theta(4);
  return base;
}

inline ThetaVector theta_of(const DeviceParams& p) {
  ThetaVector t;
  t << p.omega01, p.omega12_minus, p.omega12_plus, p.t2_1, p.t2_2;
  return t;
}

/// Joint Ramsey likelihood with per-theta simulation caching and per-alpha
/// factor caching. One instance per chain; not thread-safe.
class RamseyLikelihood {
 public:
  RamseyLikelihood(DeviceParams base, std::array<RamseyConfig, 2> sims, std::array<RamseyDataset, 2> data,
                   BackendSettings backend)
      : base_(std::move(base)), sims_(std::move(sims)), data_(std::move(data)), backend_(backend) {
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& g = data_[k].config.grid;
      const auto& s = sims_[k].grid;
      const double tol = 1e-9 * std::max(1.0, std::abs(s.step));
      if (g.n != s.n || std::abs(g.step - s.step) > tol || std::abs(g.start - s.start) > tol)
        throw DomainError("Ramsey likelihood: data grid of experiment " + std::to_string(k) +
                          " does not match the simulation grid");
      if (sims_[k].experiment != static_cast<Transition>(k))
        throw DomainError("Ramsey likelihood: experiment order must be (0<->1, 1<->2)");
      times_[k] = s.times();
    }
  }

  const BackendSettings& backend() const { return backend_; }
  const std::array<RamseyDataset, 2>& data() const { return data_; }
  const DeviceParams& base() const { return base_; }

  /// Simulated datasets at theta, cached for the most recent thetas.
  const std::array<RamseyDataset, 2>& simulate(const ThetaVector& theta) {
    for (const auto& entry : sim_cache_)
      if (entry.first == theta) return entry.second;
    const DeviceParams p = apply_theta(base_, theta);
    std::array<RamseyDataset, 2> out{simulate_ramsey(p, sims_[0]), simulate_ramsey(p, sims_[1])};
    ++simulations_;
    sim_cache_.emplace_front(theta, std::move(out));
    if (sim_cache_.size() > 2) sim_cache_.pop_back();
    return sim_cache_.front().second;
  }

  const CovarianceFactor& factor(int experiment, const NoiseHypers& h) {
    auto& cache = factor_cache_[static_cast<std::size_t>(experiment)];
    const std::array<double, 3> key{h.inv_noise_var, h.inv_gp_var, h.ell};
    for (const auto& entry : cache)
      if (entry.first == key) return *entry.second;
    auto f = build_factor(backend_, h, times_[static_cast<std::size_t>(experiment)]);
    ++factorizations_;
    cache.emplace_front(key, std::move(f));
    if (cache.size() > 4) cache.pop_back();
    return *cache.front().second;
  }

  /// log Pr(D^(k) | theta, alpha^(k)): both included components share one factor.
  double experiment_loglik(int experiment, const ThetaVector& theta, const NoiseHypers& h) {
    const auto& sim = simulate(theta)[static_cast<std::size_t>(experiment)];
    const CovarianceFactor& f = factor(experiment, h);
    const auto& obs = data_[static_cast<std::size_t>(experiment)];
    double acc = 0.0;
    for (int s : included_components(static_cast<Transition>(experiment)))
      acc += f.loglik(obs.series(s) - sim.series(s));
    return acc;
  }

  double joint(const ThetaVector& theta, const NoiseHypers& h0, const NoiseHypers& h1) {
    return experiment_loglik(0, theta, h0) + experiment_loglik(1, theta, h1);
  }

  long simulations() const { return simulations_; }
  long factorizations() const { return factorizations_; }

 private:
  DeviceParams base_;
  std::array<RamseyConfig, 2> sims_;
  std::array<RamseyDataset, 2> data_;
  BackendSettings backend_;
  std::array<Eigen::VectorXd, 2> times_;
  std::deque<std::pair<ThetaVector, std::array<RamseyDataset, 2>>> sim_cache_;
  std::array<std::deque<std::pair<std::array<double, 3>, std::shared_ptr<const CovarianceFactor>>>, 2>
      factor_cache_;
  long simulations_ = 0;
  long factorizations_ = 0;
};

inline double ramsey_joint_loglik(const DeviceParams& theta, const NoiseHypers& h0, const NoiseHypers& h1,
                                  RamseyLikelihood& lik) {
  return lik.joint(theta_of(theta), h0, h1);
}

}  // namespace qcal
