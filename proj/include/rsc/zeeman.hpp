#pragma once

#include "rsc/constants.hpp"
#include "rsc/errors.hpp"
#include "rsc/species.hpp"

#include <string_view>

namespace rsc {

/// SingleManifold: |F=4,mF=4> <-> |F=4,mF=3>.
/// InterManifold:  |F=4,mF=4> <-> |F=3,mF=3>.
enum class ZeemanLabel { SingleManifold, InterManifold };

constexpr std::string_view to_string(ZeemanLabel label)
{
  return label == ZeemanLabel::SingleManifold ? "single" : "inter";
}

/// Linear field dependence of a Raman transition energy: offset + slope * B.
template <typename Scalar = double>
struct ZeemanScheme {
  ZeemanLabel label = ZeemanLabel::SingleManifold;
  Scalar slope{};  // J / T
  Scalar offset{}; // J
};

template <typename Scalar>
ZeemanScheme<Scalar> make_zeeman_scheme(ZeemanLabel label, const AtomSpecies<Scalar>& species)
{
  const Scalar single = Scalar(constants::mu_B) * species.lande_gF_upper;
  if (label == ZeemanLabel::SingleManifold)
    return {label, single, Scalar(0)};
  return {label, Scalar(7) * single, Scalar(constants::hbar) * species.hyperfine_splitting};
}

/// Transition energy in joules at field `field` (tesla).
template <typename Scalar>
Scalar zeeman_transition_shift(const ZeemanScheme<Scalar>& scheme, Scalar field)
{
  if (field < 0)
    throw DomainError("magnetic field must be non-negative");
  return scheme.offset + scheme.slope * field;
}

template <typename Scalar>
Scalar zeeman_transition_shift_hz(const ZeemanScheme<Scalar>& scheme, Scalar field)
{
  return zeeman_transition_shift(scheme, field) / Scalar(constants::h);
}

/// Angular detuning produced by a field offset relative to the calibration field.
/// Only the slope enters; the offset is absorbed into the laser calibration.
template <typename Scalar>
Scalar zeeman_drift_detuning(const ZeemanScheme<Scalar>& scheme, Scalar delta_field)
{
  return scheme.slope * delta_field / Scalar(constants::hbar);
}

} // namespace rsc
