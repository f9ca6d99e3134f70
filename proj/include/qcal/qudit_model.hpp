#pragma once

// Four-level transmon (three measured levels plus one guard level) evolved under
// Lindblad's master equation in a frame rotating at the drive frequency.
//
// Vectorization convention: column-major, vec(rho)[i + 4 j] = rho(i, j), so
// vec(A rho B) = (B^T kron A) vec(rho).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "qcal/error.hpp"
#include "qcal/linalg.hpp"

namespace qcal {

inline constexpr int kLevels = 4;
inline constexpr int kLiouvilleDim = kLevels * kLevels;

using Mat4c = Eigen::Matrix<cplx, kLevels, kLevels>;
using Mat16c = Eigen::Matrix<cplx, kLiouvilleDim, kLiouvilleDim>;
using Vec16c = Eigen::Matrix<cplx, kLiouvilleDim, 1>;

enum class Parity { minus, plus, mean };

/// Qudit parameters. Frequencies in rad/us, times in us.
struct DeviceParams {
  double omega01 = 0.0;
  double omega12_minus = 0.0;
  double omega12_plus = 0.0;
  double t2_1 = 1.0;
  double t2_2 = 1.0;
  std::array<double, 3> t1{258.39, 100.79, 100.79};
  /// Guard-level transition; defaults to constant-anharmonicity extrapolation.
  std::optional<double> omega23;
  /// Guard-level pure dephasing; defaults to t2_2.
  std::optional<double> t2_3;
  double drive01 = 0.0;
  double drive12 = 0.0;

  double omega12_mean() const { return 0.5 * (omega12_minus + omega12_plus); }
  double charge_dispersion() const { return 0.5 * (omega12_plus - omega12_minus); }
  double omega23_value() const { return omega23.value_or(2.0 * omega12_mean() - omega01); }
  double t2_3_value() const { return t2_3.value_or(t2_2); }

  double omega12(Parity p) const {
    switch (p) {
      case Parity::minus:
        return omega12_minus;
      case Parity::plus:
        return omega12_plus;
      case Parity::mean:
        break;
    }
    return omega12_mean();
  }

  /// Strict positivity of every time constant. Frequencies are not checked
  /// here so degenerate test Hamiltonians stay constructible.
  void check_time_constants() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string("device parameter ") + name + " must be positive and finite");
    };
    positive(t2_1, "t2_1");
    positive(t2_2, "t2_2");
    positive(t2_3_value(), "t2_3");
    positive(t1[0], "t1_1");
    positive(t1[1], "t1_2");
    positive(t1[2], "t1_3");
  }

  /// Full invariant set: positive times and frequencies, ordered parity branches.
  void validate() const {
    check_time_constants();
    for (auto [v, name] : {std::pair{omega01, "omega01"}, std::pair{omega12_minus, "omega12_minus"},
                           std::pair{omega12_plus, "omega12_plus"}, std::pair{drive01, "drive01"},
                           std::pair{drive12, "drive12"}})
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string("device parameter ") + name + " must be positive and finite");
    if (!(omega12_minus < omega12_plus))
      throw DomainError("device parameters: omega12_minus must be below omega12_plus");
  }
};

/// Piecewise-constant control segment in the rotating frame.
struct ControlSegment {
  double duration = 0.0;  // us
  double i_amp = 0.0;     // rad/us
  double q_amp = 0.0;     // rad/us
};

/// Lowering operator with sqrt(1), sqrt(2), sqrt(3) on the superdiagonal.
inline Mat4c lowering_operator() {
  Mat4c a = Mat4c::Zero();
  for (int k = 0; k + 1 < kLevels; ++k) a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  return a;
}

inline Mat4c number_operator() {
  Mat4c n = Mat4c::Zero();
  for (int k = 0; k < kLevels; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

inline Mat4c build_system_hamiltonian(const DeviceParams& p, Parity parity) {
  const double w12 = p.omega12(parity);
  Mat4c h = Mat4c::Zero();
  h(1, 1) = p.omega01;
  h(2, 2) = p.omega01 + w12;
  h(3, 3) = p.omega01 + w12 + p.omega23_value();
  return h;
}

/// Hs - wd a^dag a + I (a + a^dag) - i Q (a - a^dag).
inline Mat4c build_rotating_hamiltonian(const Mat4c& hs, double omega_d, const ControlSegment& seg) {
  const Mat4c a = lowering_operator();
  const Mat4c ad = a.adjoint();
  const cplx i_unit(0.0, 1.0);
  return hs - omega_d * number_operator() + seg.i_amp * (a + ad) - i_unit * seg.q_amp * (a - ad);
}

struct DecoherenceOps {
  Mat4c decay;     // L1
  Mat4c dephase;   // L2
};

/// Decay rates 1/T1,k on the superdiagonal; dephasing amplitudes from the
/// recurrence sqrt(g_k) = sqrt(g_{k-1}) + sqrt(2 / T2,k) with g_0 = 0.
inline DecoherenceOps build_decoherence_ops(const DeviceParams& p) {
  p.check_time_constants();
  DecoherenceOps ops{Mat4c::Zero(), Mat4c::Zero()};
  for (int k = 0; k < 3; ++k) ops.decay(k, k + 1) = std::sqrt(1.0 / p.t1[static_cast<std::size_t>(k)]);
  const std::array<double, 3> t2{p.t2_1, p.t2_2, p.t2_3_value()};
  double root = 0.0;
  for (int k = 1; k < kLevels; ++k) {
    root += std::sqrt(2.0 / t2[static_cast<std::size_t>(k - 1)]);
    ops.dephase(k, k) = root;
  }
  return ops;
}

struct LindbladGenerator {
  Mat16c superop = Mat16c::Zero();
  Parity parity = Parity::mean;
  double drive = 0.0;
  ControlSegment segment{};
};

/// Superoperator acting on column-major vec(rho).
inline LindbladGenerator build_lindblad_generator(const Mat4c& h_rot, const Mat4c& l1, const Mat4c& l2) {
  const double scale = std::max(1.0, h_rot.cwiseAbs().maxCoeff());
  if ((h_rot - h_rot.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("build_lindblad_generator: Hamiltonian is not Hermitian");

  const Mat4c id = Mat4c::Identity();
  const cplx i_unit(0.0, 1.0);
  LindbladGenerator gen;
  gen.superop = -i_unit * (kron(id, h_rot) - kron(h_rot.transpose(), id));
  for (const Mat4c* l : {&l1, &l2}) {
    const Mat4c ldl = l->adjoint() * (*l);
    gen.superop += kron(l->conjugate(), *l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
  }
  return gen;
}

/// Generator for one control segment of a given experiment and parity branch.
inline LindbladGenerator make_generator(const DeviceParams& p, Parity parity, double omega_d,
                                        const ControlSegment& seg) {
  const DecoherenceOps ops = build_decoherence_ops(p);
  LindbladGenerator gen =
      build_lindblad_generator(build_rotating_hamiltonian(build_system_hamiltonian(p, parity), omega_d, seg),
                               ops.decay, ops.dephase);
  gen.parity = parity;
  gen.drive = omega_d;
  gen.segment = seg;
  return gen;
}

/// Density matrix with checked invariants.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(const Mat4c& m) : m_(m) {}

  static DensityMatrix basis(int level) {
    Mat4c m = Mat4c::Zero();
    m(level, level) = 1.0;
    return DensityMatrix(m);
  }

  static DensityMatrix maximally_mixed() { return DensityMatrix(Mat4c::Identity() / double(kLevels)); }

  const Mat4c& matrix() const { return m_; }

  Vec16c vec() const { return Eigen::Map<const Vec16c>(m_.data()); }

  static DensityMatrix from_vec(const Vec16c& v) { return DensityMatrix(Eigen::Map<const Mat4c>(v.data())); }

  double trace() const { return m_.trace().real(); }
  double purity() const { return (m_ * m_).trace().real(); }
  double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Mat4c> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  /// Hermitian to 1e-12, unit trace to 1e-12, eigenvalues >= -1e-10.
  bool is_valid(double herm_tol = 1e-12, double trace_tol = 1e-12, double eig_tol = 1e-10) const {
    return hermiticity_error() <= herm_tol && std::abs(trace() - 1.0) <= trace_tol &&
           min_eigenvalue() >= -eig_tol;
  }

 private:
  Mat4c m_ = Mat4c::Zero();
};

inline DensityMatrix propagate(const LindbladGenerator& gen, const DensityMatrix& rho, double t) {
  if (!(t >= 0.0)) throw DomainError("propagate: time must be nonnegative");
  if (t == 0.0) return rho;
  const Mat16c step = expm(gen.superop * cplx(t, 0.0));
  return DensityMatrix::from_vec(step * rho.vec());
}

/// Fixed-step propagator: one exp(L dt) reused across a uniform grid.
class Propagator {
 public:
  Propagator(const LindbladGenerator& gen, double dt) {
    if (!(dt >= 0.0)) throw DomainError("Propagator: step must be nonnegative");
    step_ = expm(gen.superop * cplx(dt, 0.0));
  }

  Vec16c advance(const Vec16c& v) const { return step_ * v; }
  const Mat16c& matrix() const { return step_; }

 private:
  Mat16c step_;
};

/// Populations of the three measured levels; the guard level is dropped.
inline std::array<double, 3> populations(const DensityMatrix& rho) {
  const Mat4c& m = rho.matrix();
  return {m(0, 0).real(), m(1, 1).real(), m(2, 2).real()};
}

}  // namespace qcal
