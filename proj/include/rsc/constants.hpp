#pragma once

#include <numbers>

namespace rsc {

/// CODATA 2018 values, SI units.
namespace constants {
inline constexpr double pi = std::numbers::pi;
inline constexpr double h = 6.62607015e-34;      // J s
inline constexpr double hbar = h / (2.0 * pi);   // J s
inline constexpr double k_B = 1.380649e-23;      // J / K
inline constexpr double mu_B = 9.2740100783e-24; // J / T
inline constexpr double c = 299792458.0;         // m / s
inline constexpr double amu = 1.66053906660e-27; // kg
} // namespace constants

template <typename Scalar>
constexpr Scalar angular_from_hz(Scalar hz)
{
  return Scalar(2) * Scalar(constants::pi) * hz;
}

template <typename Scalar>
constexpr Scalar hz_from_angular(Scalar omega)
{
  return omega / (Scalar(2) * Scalar(constants::pi));
}

template <typename Scalar>
constexpr Scalar millikelvin_from_joule(Scalar energy)
{
  return energy / Scalar(constants::k_B) * Scalar(1e3);
}

} // namespace rsc
