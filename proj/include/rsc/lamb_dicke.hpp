#pragma once

#include "rsc/axis.hpp"
#include "rsc/constants.hpp"
#include "rsc/errors.hpp"

#include <Eigen/Core>

#include <cmath>

namespace rsc {

/// Per-axis Lamb-Dicke parameters for one process (Raman or optical pumping).
template <typename Scalar = double>
struct LambDickeSet {
  Scalar eta_x{}, eta_y{}, eta_z{};

  Scalar operator[](Axis axis) const
  {
    switch (axis) {
    case Axis::x: return eta_x;
    case Axis::y: return eta_y;
    case Axis::z: return eta_z;
    }
    return Scalar(0);
  }

  void validate() const
  {
    for (Axis a : all_axes)
      if (!((*this)[a] > 0 && (*this)[a] < 1))
        throw DomainError("Lamb-Dicke parameter on axis " + std::string(to_string(a)) +
                          " must lie in (0, 1)");
  }
};

/// Reported experimental values, used as overrides of the geometric estimate.
template <typename Scalar = double>
constexpr LambDickeSet<Scalar> reference_raman_lamb_dicke{Scalar(0.16), Scalar(0.25), Scalar(0.23)};
template <typename Scalar = double>
constexpr LambDickeSet<Scalar> reference_pump_lamb_dicke{Scalar(0.172), Scalar(0.186), Scalar(0.253)};

/// Ground-state extent sqrt(hbar / (2 m omega)).
template <typename Scalar>
Scalar oscillator_length(Scalar mass, Scalar omega)
{
  if (!(mass > 0) || !(omega > 0))
    throw DomainError("oscillator_length requires positive mass and frequency");
  using std::sqrt;
  return sqrt(Scalar(constants::hbar) / (Scalar(2) * mass * omega));
}

template <typename Scalar>
Scalar lamb_dicke_raman(Scalar q0, Scalar delta_k)
{
  if (!(q0 > 0) || delta_k < 0)
    throw DomainError("lamb_dicke_raman requires q0 > 0 and delta_k >= 0");
  return q0 * delta_k;
}

/// Thermally enhanced coupling scale eta * sqrt(2 nbar + 1).
template <typename Scalar>
Scalar effective_lamb_dicke(Scalar eta, Scalar nbar)
{
  if (eta < 0 || nbar < 0)
    throw DomainError("effective_lamb_dicke requires eta >= 0 and nbar >= 0");
  using std::sqrt;
  return eta * sqrt(Scalar(2) * nbar + Scalar(1));
}

/// Wavevector difference k1 - k2 of two beams of equal wavelength travelling along
/// `dir1` and `dir2` (normalised internally).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> raman_wavevector_difference(const Eigen::Matrix<Scalar, 3, 1>& dir1,
                                                        const Eigen::Matrix<Scalar, 3, 1>& dir2,
                                                        Scalar wavelength)
{
  const Scalar k = Scalar(2) * Scalar(constants::pi) / wavelength;
  return k * (dir1.normalized() - dir2.normalized());
}

/// Raman beam directions. RB1 pairs with RB2 for the x and z axes and with RB3 for y.
template <typename Scalar = double>
struct RamanGeometry {
  Eigen::Matrix<Scalar, 3, 1> rb1{1, 0, 0};
  Eigen::Matrix<Scalar, 3, 1> rb2{0, 0, -1};
  Eigen::Matrix<Scalar, 3, 1> rb3{0, 1, 0};
  Scalar wavelength{};
};

/// Raman Lamb-Dicke parameters estimated from beam geometry and trap frequencies
/// (omegas indexed x, y, z).
template <typename Scalar>
LambDickeSet<Scalar> raman_lamb_dicke_from_geometry(const RamanGeometry<Scalar>& geometry, Scalar mass,
                                                    const Eigen::Matrix<Scalar, 3, 1>& omegas)
{
  using std::abs;
  const auto dk12 = raman_wavevector_difference(geometry.rb1, geometry.rb2, geometry.wavelength);
  const auto dk13 = raman_wavevector_difference(geometry.rb1, geometry.rb3, geometry.wavelength);
  LambDickeSet<Scalar> set;
  set.eta_x = lamb_dicke_raman(oscillator_length(mass, omegas[0]), abs(dk12[0]));
  set.eta_y = lamb_dicke_raman(oscillator_length(mass, omegas[1]), abs(dk13[1]));
  set.eta_z = lamb_dicke_raman(oscillator_length(mass, omegas[2]), abs(dk12[2]));
  return set;
}

/// Wavelength of light detuned by `detuning` (angular) from a line at `line_wavelength`.
template <typename Scalar>
Scalar detuned_wavelength(Scalar line_wavelength, Scalar detuning)
{
  const Scalar c = Scalar(constants::c);
  return c / (c / line_wavelength + hz_from_angular(detuning));
}

} // namespace rsc
