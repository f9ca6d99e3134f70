#pragma once

// Ramsey k <-> k+1 protocol: prepare |k>, pi/2 pulse, free evolution for the
// dark time, pi/2 pulse, read populations. The 1 <-> 2 experiment averages the
// two charge-parity branches.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "qcal/error.hpp"
#include "qcal/qudit_model.hpp"

namespace qcal {

enum class Transition { t01 = 0, t12 = 1 };
enum class PulseMode { ideal, finite };

/// Uniform grid t_i = start + i * step, i = 0..n-1 (us).
struct DarkTimeGrid {
  double start = 0.02;
  double step = 0.02;
  int n = 500;

  double at(int i) const { return start + step * i; }

  Eigen::VectorXd times() const {
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) t(i) = at(i);
    return t;
  }

  void validate() const {
    if (n < 1) throw DomainError("dark-time grid needs n >= 1");
    if (!(step > 0.0)) throw DomainError("dark-time grid step must be positive");
    if (!(start >= 0.0)) throw DomainError("dark-time grid must start at a nonnegative time");
  }

  bool operator==(const DarkTimeGrid&) const = default;
};

struct RamseyConfig {
  Transition experiment = Transition::t01;
  DarkTimeGrid grid{};
  double drive = 0.0;  // rad/us, frame of the target transition
  PulseMode pulse_mode = PulseMode::ideal;
  double pulse_amplitude = 0.0;  // rad/us, finite-pulse mode only

  void validate() const {
    grid.validate();
    if (!(drive > 0.0)) throw DomainError("Ramsey drive frequency must be positive");
    if (pulse_mode == PulseMode::finite && !(pulse_amplitude > 0.0))
      throw DomainError("finite-pulse mode needs a positive pulse amplitude");
  }
};

struct RamseyDataset {
  RamseyConfig config;
  std::array<Eigen::VectorXd, 3> populations;  // p0, p1, p2 over the grid

  const Eigen::VectorXd& series(int state) const { return populations.at(static_cast<std::size_t>(state)); }
};

/// exp(-i angle/2 sigma_x) on levels (k, k+1), identity elsewhere.
inline Mat4c ideal_rotation(int lower_level, double angle) {
  Mat4c u = Mat4c::Identity();
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const int k = lower_level;
  u(k, k) = c;
  u(k + 1, k + 1) = c;
  u(k, k + 1) = cplx(0.0, -s);
  u(k + 1, k) = cplx(0.0, -s);
  return u;
}

/// Constant-amplitude segment realizing a rotation of `angle` on k <-> k+1.
inline ControlSegment finite_pulse(int lower_level, double angle, double amplitude) {
  return {angle / (2.0 * amplitude * std::sqrt(static_cast<double>(lower_level + 1))), amplitude, 0.0};
}

namespace detail {

// One parity branch: populations of levels 0..2 at every dark time.
inline std::array<Eigen::VectorXd, 3> ramsey_branch(const DeviceParams& p, const RamseyConfig& cfg,
                                                    Parity parity) {
  using std::numbers::pi;
  const int k = static_cast<int>(cfg.experiment);
  const int n = cfg.grid.n;
  const ControlSegment idle{};

  // Preparation and first pi/2.
  Mat4c rho = DensityMatrix::basis(0).matrix();
  Mat16c second_pulse = Mat16c::Identity();
  Mat4c second_unitary = Mat4c::Identity();
  if (cfg.pulse_mode == PulseMode::ideal) {
    Mat4c u = ideal_rotation(k, pi / 2.0);
    if (k == 1) u = u * ideal_rotation(0, pi);
    rho = u * rho * u.adjoint();
    second_unitary = ideal_rotation(k, pi / 2.0);
  } else {
    Vec16c v = DensityMatrix(rho).vec();
    if (k == 1) {
      // The preparation pulse runs in the 0 <-> 1 frame; the clock of the
      // target frame starts when it ends.
      const ControlSegment prep = finite_pulse(0, pi, cfg.pulse_amplitude);
      v = expm(make_generator(p, parity, p.drive01, prep).superop * cplx(prep.duration, 0.0)) * v;
    }
    const ControlSegment half = finite_pulse(k, pi / 2.0, cfg.pulse_amplitude);
    const Mat16c half_map = expm(make_generator(p, parity, cfg.drive, half).superop * cplx(half.duration, 0.0));
    v = half_map * v;
    rho = DensityMatrix::from_vec(v).matrix();
    second_pulse = half_map;
  }

  const LindbladGenerator free_gen = make_generator(p, parity, cfg.drive, idle);
  const Propagator stepper(free_gen, cfg.grid.step);
  Vec16c v = DensityMatrix(rho).vec();
  if (cfg.grid.start == cfg.grid.step)
    v = stepper.advance(v);
  else if (cfg.grid.start > 0.0)
    v = expm(free_gen.superop * cplx(cfg.grid.start, 0.0)) * v;

  std::array<Eigen::VectorXd, 3> pops{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    if (i > 0) v = stepper.advance(v);
    Mat4c out;
    if (cfg.pulse_mode == PulseMode::ideal) {
      const Mat4c r = Eigen::Map<const Mat4c>(v.data());
      out = second_unitary * r * second_unitary.adjoint();
    } else {
      const Vec16c w = second_pulse * v;
      out = Eigen::Map<const Mat4c>(w.data());
    }
    for (int s = 0; s < 3; ++s) pops[static_cast<std::size_t>(s)](i) = out(s, s).real();
  }
  return pops;
}

}  // namespace detail

inline RamseyDataset simulate_ramsey(const DeviceParams& p, const RamseyConfig& cfg) {
  cfg.validate();
  p.check_time_constants();
  RamseyDataset out{cfg, {}};
  if (cfg.experiment == Transition::t01) {
    out.populations = detail::ramsey_branch(p, cfg, Parity::mean);
    return out;
  }
  const auto minus = detail::ramsey_branch(p, cfg, Parity::minus);
  const auto plus = detail::ramsey_branch(p, cfg, Parity::plus);
  for (std::size_t s = 0; s < 3; ++s) out.populations[s] = 0.5 * (minus[s] + plus[s]);
  return out;
}

struct SpectrumPoint {
  double frequency;  // MHz (cycles per us)
  double magnitude;
};

/// One-sided DFT amplitude of the mean-removed series, bins k / (n dt).
inline std::vector<SpectrumPoint> amplitude_spectrum(std::span<const double> series, double dt) {
  const std::size_t n = series.size();
  if (n < 8) throw DomainError("spectrum needs at least 8 samples");
  if (!(dt > 0.0)) throw DomainError("spectrum needs a positive sample spacing");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  std::vector<SpectrumPoint> out;
  out.reserve(n / 2 + 1);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double phase = -two_pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
      acc += (series[j] - mean) * std::polar(1.0, phase);
    }
    out.push_back({static_cast<double>(k) / (static_cast<double>(n) * dt),
                   2.0 * std::abs(acc) / static_cast<double>(n)});
  }
  return out;
}

inline std::vector<SpectrumPoint> detuning_spectrum(const RamseyDataset& data, int state) {
  const Eigen::VectorXd& s = data.series(state);
  return amplitude_spectrum(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())),
                           data.config.grid.step);
}

/// Local maxima above `rel_threshold` times the global maximum, DC excluded.
inline std::vector<SpectrumPoint> find_peaks(const std::vector<SpectrumPoint>& spec, double rel_threshold = 0.3) {
  std::vector<SpectrumPoint> peaks;
  double top = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) top = std::max(top, spec[k].magnitude);
  if (top <= 1e-12) return peaks;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double m = spec[k].magnitude;
    const double left = spec[k - 1].magnitude;
    const double right = k + 1 < spec.size() ? spec[k + 1].magnitude : 0.0;
    if (m >= rel_threshold * top && m > left && m >= right) peaks.push_back(spec[k]);
  }
  return peaks;
}

}  // namespace qcal
