#pragma once

#include <numbers>

// Internal units: time in microseconds, angular frequency in rad/us.
// File and config I/O use ordinary frequency in GHz and time in us.
namespace qcal::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// GHz (ordinary) -> rad/us.
constexpr double ghz_to_rad_per_us(double f_ghz) { return two_pi * 1.0e3 * f_ghz; }

/// rad/us -> GHz (ordinary).
constexpr double rad_per_us_to_ghz(double w) { return w / (two_pi * 1.0e3); }

/// MHz (ordinary) -> rad/us.
constexpr double mhz_to_rad_per_us(double f_mhz) { return two_pi * f_mhz; }

constexpr double rad_per_us_to_mhz(double w) { return w / two_pi; }

}  // namespace qcal::units
