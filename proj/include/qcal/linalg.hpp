#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qcal/error.hpp"

namespace qcal {

using cplx = std::complex<double>;

/// Kronecker product A (x) B.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  constexpr int rows =
      (DerivedA::RowsAtCompileTime == Eigen::Dynamic || DerivedB::RowsAtCompileTime == Eigen::Dynamic)
          ? Eigen::Dynamic
          : int(DerivedA::RowsAtCompileTime) * int(DerivedB::RowsAtCompileTime);
  constexpr int cols =
      (DerivedA::ColsAtCompileTime == Eigen::Dynamic || DerivedB::ColsAtCompileTime == Eigen::Dynamic)
          ? Eigen::Dynamic
          : int(DerivedA::ColsAtCompileTime) * int(DerivedB::ColsAtCompileTime);
  Eigen::Matrix<Scalar, rows, cols> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace detail {

// Pade(13,13) coefficients for exp, with the theta_13 threshold on the 1-norm.
inline constexpr double pade13_b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                      1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                      670442572800.0,      33522128640.0,       1323241920.0,
                                      40840800.0,          960960.0,            16380.0,
                                      182.0,               1.0};
inline constexpr double pade13_theta = 5.371920351148152;

}  // namespace detail

/// Matrix exponential by scaling and squaring with a fixed degree-13 Pade approximant.
template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& a_in) {
  using Mat = typename Derived::PlainObject;
  const auto& b = detail::pade13_b;
  if (a_in.rows() != a_in.cols()) throw DomainError("expm: matrix must be square");

  const double norm1 = a_in.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw NumericalError("expm: non-finite input");
  int squarings = 0;
  if (norm1 > detail::pade13_theta)
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / detail::pade13_theta))));

  const Mat a = a_in * std::ldexp(1.0, -squarings);
  const Mat ident = Mat::Identity(a.rows(), a.cols());
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
                      b[1] * ident;
  const Mat u = a * u_inner;
  const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
                b[0] * ident;
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = (r * r).eval();
  return r;
}

/// Top-r eigenpairs of a symmetric matrix, eigenvalues descending.
struct TopEigen {
  Eigen::VectorXd values;   // r, descending
  Eigen::MatrixXd vectors;  // n x r, orthonormal columns
};

// Full tridiagonal QR, then the top r columns. The system OpenBLAS (0.3.20)
// returns wrong dsyev/dsyevr results for n >= ~150 on AVX-512 hosts, so LAPACK
// is not used here.
inline TopEigen top_symmetric_eigenpairs(const Eigen::MatrixXd& sym, int r) {
  const int n = static_cast<int>(sym.rows());
  if (sym.cols() != n) throw DomainError("top_symmetric_eigenpairs: matrix must be square");
  if (r < 1 || r > n) throw DomainError("top_symmetric_eigenpairs: need 1 <= r <= n");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  // Ascending order; flip to descending.
  TopEigen out;
  out.values = es.eigenvalues().tail(r).reverse();
  out.vectors = es.eigenvectors().rightCols(r).rowwise().reverse();
  return out;
}

/// Symmetrizes and clips negative eigenvalues to zero.
inline Eigen::MatrixXd psd_floor(const Eigen::MatrixXd& c) {
  const Eigen::MatrixXd sym = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

/// Symmetric square root of a PSD matrix (negative eigenvalues clipped).
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& c) {
  const Eigen::MatrixXd sym = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace qcal
