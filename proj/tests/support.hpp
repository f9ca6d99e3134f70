#pragma once

#include <Eigen/Dense>

#include <random>

#include "qcal/config.hpp"
#include "qcal/qudit_model.hpp"
#include "qcal/units.hpp"

namespace qcal::test {

/// Device with the published drive frequencies, fixed T1s and theta near the
/// reported posterior means.
inline DeviceParams default_device() { return default_run_config().device; }

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) { return random_matrix(rng, n, 1); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::VectorXd sorted_times(std::mt19937_64& rng, Eigen::Index n, double span) {
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) t(i) = uniform(rng, 0.0, span);
  std::sort(t.data(), t.data() + n);
  return t;
}

/// Monte Carlo standard error of the mean of a correlated series, from
/// `batches` non-overlapping batch means.
inline double batch_means_se(const Eigen::VectorXd& v, int batches = 50) {
  const Eigen::Index len = v.size() / batches;
  Eigen::VectorXd m(batches);
  for (int b = 0; b < batches; ++b) m(b) = v.segment(b * len, len).mean();
  const double var = (m.array() - m.mean()).square().sum() / (batches - 1.0);
  return std::sqrt(var / batches);
}

}  // namespace qcal::test
