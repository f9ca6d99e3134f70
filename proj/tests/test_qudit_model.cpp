#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

#include "qcal/qudit_model.hpp"
#include "support.hpp"

using namespace qcal;

namespace {

using State = std::vector<cplx>;

// Independent reference: integrate drho/dt = -i[H, rho] + sum D[L](rho) on the
// 4x4 matrix directly with an adaptive Dormand-Prince scheme.
Mat4c integrate_ode(const Mat4c& h, const Mat4c& l1, const Mat4c& l2, const Mat4c& rho0, double t) {
  namespace ode = boost::numeric::odeint;
  State x(rho0.data(), rho0.data() + 16);
  auto rhs = [&](const State& s, State& ds, double) {
    const Mat4c r = Eigen::Map<const Mat4c>(s.data());
    Mat4c d = cplx(0.0, -1.0) * (h * r - r * h);
    for (const Mat4c* l : {&l1, &l2}) {
      const Mat4c ldl = l->adjoint() * (*l);
      d += (*l) * r * l->adjoint() - 0.5 * (ldl * r + r * ldl);
    }
    Eigen::Map<Mat4c>(ds.data()) = d;
  };
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  ode::integrate_adaptive(stepper, rhs, x, 0.0, t, 1e-3);
  return Eigen::Map<const Mat4c>(x.data());
}

Mat4c random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat4c a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = cplx(n(rng), n(rng));
  Mat4c rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST(Expm, MatchesEigenMatrixFunctionOnRandomGenerators) {
  std::mt19937_64 rng(7);
  const DeviceParams p = test::default_device();
  for (double t : {0.01, 0.3, 2.0, 10.0}) {
    const auto gen = make_generator(p, Parity::plus, p.drive12, {0.0, 5.0, 1.0});
    const Mat16c a = gen.superop * cplx(t, 0.0);
    const Mat16c ours = expm(a);
    const Mat16c ref = a.exp();
    EXPECT_LT((ours - ref).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, ref.cwiseAbs().maxCoeff())) << t;
  }
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_TRUE(expm(z).isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST(Operators, LoweringAndNumber) {
  const Mat4c a = lowering_operator();
  EXPECT_NEAR(std::abs(a(2, 3) - std::sqrt(3.0)), 0.0, 1e-15);
  EXPECT_TRUE((a.adjoint() * a).isApprox(number_operator()));
}

TEST(Decoherence, RecurrenceForDephasing) {
  DeviceParams p = test::default_device();
  const auto ops = build_decoherence_ops(p);
  const double r1 = std::sqrt(2.0 / p.t2_1);
  const double r2 = r1 + std::sqrt(2.0 / p.t2_2);
  const double r3 = r2 + std::sqrt(2.0 / p.t2_2);
  EXPECT_DOUBLE_EQ(ops.dephase(1, 1).real(), r1);
  EXPECT_DOUBLE_EQ(ops.dephase(2, 2).real(), r2);
  EXPECT_DOUBLE_EQ(ops.dephase(3, 3).real(), r3);
  EXPECT_DOUBLE_EQ(ops.decay(0, 1).real(), std::sqrt(1.0 / 258.39));
  EXPECT_DOUBLE_EQ(ops.decay(2, 3).real(), std::sqrt(1.0 / 100.79));

  p.t2_1 = 0.0;
  EXPECT_THROW(build_decoherence_ops(p), DomainError);
}

TEST(Hamiltonian, GuardLevelDefaultsToConstantAnharmonicity) {
  const DeviceParams p = test::default_device();
  const Mat4c h = build_system_hamiltonian(p, Parity::mean);
  const double w12 = p.omega12_mean();
  EXPECT_NEAR(h(3, 3).real() - h(2, 2).real(), 2.0 * w12 - p.omega01, 1e-9);
}

TEST(Lindblad, RejectsNonHermitianHamiltonian) {
  Mat4c h = Mat4c::Zero();
  h(0, 1) = 1.0;
  EXPECT_THROW(build_lindblad_generator(h, Mat4c::Zero(), Mat4c::Zero()), DomainError);
}

TEST(Lindblad, GeneratorPreservesTrace) {
  const DeviceParams p = test::default_device();
  const auto gen = make_generator(p, Parity::minus, p.drive12, {0.0, 3.0, -2.0});
  // Trace functional is vec(I)^T; it must annihilate the generator.
  Vec16c tr = Vec16c::Zero();
  for (int k = 0; k < 4; ++k) tr(k + 4 * k) = 1.0;
  EXPECT_LT((tr.transpose() * gen.superop).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Lindblad, PhysicalityOverTenMicroseconds) {
  std::mt19937_64 rng(11);
  const DeviceParams p = test::default_device();
  for (int trial = 0; trial < 5; ++trial) {
    const auto gen = make_generator(p, trial % 2 ? Parity::plus : Parity::mean, p.drive01,
                                    {0.0, 2.0 * trial, 0.5 * trial});
    const DensityMatrix rho0(random_density(rng));
    for (double t : {0.5, 2.5, 10.0}) {
      const DensityMatrix r = propagate(gen, rho0, t);
      EXPECT_TRUE(r.is_valid()) << "trace err " << std::abs(r.trace() - 1.0) << " herm " << r.hermiticity_error()
                                << " mineig " << r.min_eigenvalue();
    }
  }
}

TEST(Lindblad, PropagateMatchesAdaptiveOde) {
  std::mt19937_64 rng(3);
  const DeviceParams p = test::default_device();
  const auto ops = build_decoherence_ops(p);
  const ControlSegment segs[] = {{0.0, 0.0, 0.0}, {0.0, 4.0, 0.0}, {0.0, 1.5, -3.0}};
  for (const auto& seg : segs) {
    const Mat4c h = build_rotating_hamiltonian(build_system_hamiltonian(p, Parity::minus), p.drive12, seg);
    const auto gen = build_lindblad_generator(h, ops.decay, ops.dephase);
    const Mat4c rho0 = random_density(rng);
    for (double t : {0.37, 3.0}) {
      const Mat4c ours = propagate(gen, DensityMatrix(rho0), t).matrix();
      const Mat4c ref = integrate_ode(h, ops.decay, ops.dephase, rho0, t);
      EXPECT_LT((ours - ref).cwiseAbs().maxCoeff(), 1e-8) << "t=" << t;
    }
  }
}

TEST(Lindblad, AnalyticT1Decay) {
  const DeviceParams p = test::default_device();
  const auto gen = make_generator(p, Parity::mean, p.drive01, {});
  for (double t : {1.0, 10.0, 50.0, 200.0}) {
    const auto pops = populations(propagate(gen, DensityMatrix::basis(1), t));
    EXPECT_NEAR(pops[1], std::exp(-t / p.t1[0]), 1e-6) << t;
    EXPECT_NEAR(pops[0], 1.0 - std::exp(-t / p.t1[0]), 1e-6) << t;
  }
}

TEST(Lindblad, ZeroAndNegativeTimes) {
  const DeviceParams p = test::default_device();
  const auto gen = make_generator(p, Parity::mean, p.drive01, {});
  const auto rho = DensityMatrix::basis(2);
  EXPECT_EQ(propagate(gen, rho, 0.0).matrix(), rho.matrix());
  EXPECT_THROW(propagate(gen, rho, -1e-3), DomainError);
}

TEST(Lindblad, MaximallyMixedStaysValidAndGroundIsStationary) {
  const DeviceParams p = test::default_device();
  const auto gen = make_generator(p, Parity::mean, p.drive01, {});
  const auto g = propagate(gen, DensityMatrix::basis(0), 10.0);
  EXPECT_NEAR(g.purity(), 1.0, 1e-11);
  const auto m = propagate(gen, DensityMatrix::maximally_mixed(), 10.0);
  EXPECT_TRUE(m.is_valid());
  EXPECT_GT(populations(m)[0], 0.25);
}

TEST(Propagator, RepeatedStepsMatchSingleExponential) {
  const DeviceParams p = test::default_device();
  const auto gen = make_generator(p, Parity::plus, p.drive12, {});
  const Propagator step(gen, 0.02);
  std::mt19937_64 rng(5);
  Vec16c v = DensityMatrix(random_density(rng)).vec();
  const Vec16c v0 = v;
  for (int i = 0; i < 500; ++i) v = step.advance(v);
  const Vec16c direct = expm(gen.superop * cplx(10.0, 0.0)) * v0;
  EXPECT_LT((v - direct).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Hamiltonian, ParityBranchesDifferOnlyInUpperLevels) {
  const DeviceParams p = test::default_device();
  const Mat4c d = build_system_hamiltonian(p, Parity::plus) - build_system_hamiltonian(p, Parity::minus);
  const double eps = p.omega12_plus - p.omega12_minus;
  Mat4c expect = Mat4c::Zero();
  expect(2, 2) = expect(3, 3) = eps;
  EXPECT_LT((d - expect).cwiseAbs().maxCoeff(), 1e-9);
  const Mat4c h = build_system_hamiltonian(p, Parity::minus);
  for (int k = 1; k < 4; ++k) EXPECT_GT(h(k, k).real(), h(k - 1, k - 1).real());
}

TEST(Hamiltonian, RotatingFrameDiagonal) {
  DeviceParams p = test::default_device();
  const Mat4c hr = build_rotating_hamiltonian(build_system_hamiltonian(p, Parity::mean), p.drive01, {});
  EXPECT_NEAR(hr(1, 1).real(), p.omega01 - p.drive01, 1e-9);
  EXPECT_LT((hr - hr.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  const Mat4c driven = build_rotating_hamiltonian(build_system_hamiltonian(p, Parity::mean), p.drive01, {0.0, 2.0, 3.0});
  EXPECT_LT((driven - driven.adjoint()).cwiseAbs().maxCoeff(), 1e-14);

  // Harmonic ladder driven on resonance: every level rotates away.
  Mat4c ladder = Mat4c::Zero();
  for (int k = 0; k < 4; ++k) ladder(k, k) = k * p.omega01;
  EXPECT_LT(build_rotating_hamiltonian(ladder, p.omega01, {}).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Lindblad, ZeroRatesAndZeroHamiltonianGiveZeroGenerator) {
  const auto gen = build_lindblad_generator(Mat4c::Zero(), Mat4c::Zero(), Mat4c::Zero());
  EXPECT_TRUE(gen.superop.isZero(0.0));
}

TEST(Lindblad, TraceRowVanishesWithoutControls) {
  const DeviceParams p = test::default_device();
  Vec16c tr = Vec16c::Zero();
  for (int k = 0; k < 4; ++k) tr(k + 4 * k) = 1.0;
  for (auto parity : {Parity::minus, Parity::plus, Parity::mean}) {
    const auto gen = make_generator(p, parity, p.drive12, {});
    EXPECT_LT((tr.transpose() * gen.superop).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Lindblad, TwoLevelDecayByHand) {
  const double g = 0.37;
  Mat4c l1 = Mat4c::Zero();
  l1(0, 1) = std::sqrt(g);
  const auto gen = build_lindblad_generator(Mat4c::Zero(), l1, Mat4c::Zero());
  const Vec16c d = gen.superop * DensityMatrix::basis(1).vec();
  const Mat4c dm = Eigen::Map<const Mat4c>(d.data());
  EXPECT_NEAR(dm(1, 1).real(), -g, 1e-15);
  EXPECT_NEAR(dm(0, 0).real(), g, 1e-15);
}

TEST(Lindblad, SemigroupProperty) {
  std::mt19937_64 rng(21);
  const DeviceParams p = test::default_device();
  const auto gen = make_generator(p, Parity::minus, p.drive12, {0.0, 1.0, 0.5});
  const DensityMatrix rho(random_density(rng));
  const auto once = propagate(gen, rho, 7.5);
  const auto twice = propagate(gen, propagate(gen, rho, 3.0), 4.5);
  EXPECT_LT((once.matrix() - twice.matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lindblad, PurityConservedWithoutDecoherence) {
  std::mt19937_64 rng(22);
  const DeviceParams p = test::default_device();
  const Mat4c h = build_rotating_hamiltonian(build_system_hamiltonian(p, Parity::mean), p.drive01, {0.0, 3.0, 1.0});
  const auto gen = build_lindblad_generator(h, Mat4c::Zero(), Mat4c::Zero());
  const DensityMatrix rho(random_density(rng));
  for (double t : {1.0, 5.0, 10.0}) EXPECT_NEAR(propagate(gen, rho, t).purity(), rho.purity(), 1e-10) << t;
}

TEST(Populations, ExcludeTheGuardLevel) {
  EXPECT_EQ(populations(DensityMatrix::basis(0)), (std::array<double, 3>{1.0, 0.0, 0.0}));
  EXPECT_EQ(populations(DensityMatrix::basis(3)), (std::array<double, 3>{0.0, 0.0, 0.0}));
  EXPECT_EQ(populations(DensityMatrix::maximally_mixed()), (std::array<double, 3>{0.25, 0.25, 0.25}));
}
