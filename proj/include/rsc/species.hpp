#pragma once

#include "rsc/constants.hpp"
#include "rsc/errors.hpp"

#include <filesystem>
#include <string>

namespace rsc {

/// Alkali atom data used by the trap and cooling models. Frequencies are angular.
template <typename Scalar = double>
struct AtomSpecies {
  std::string name;
  Scalar mass{};                // kg
  Scalar d1_wavelength{};       // m
  Scalar d2_wavelength{};       // m
  Scalar d1_linewidth{};        // rad/s
  Scalar d2_linewidth{};        // rad/s
  Scalar hyperfine_splitting{}; // rad/s, ground state
  Scalar lande_gF_upper{};      // upper ground hyperfine manifold
  Scalar lande_gF_lower{};      // lower ground hyperfine manifold

  void validate() const
  {
    if (!(mass > 0))
      throw DomainError("species mass must be positive");
    if (!(d1_wavelength > 0) || !(d2_wavelength > 0))
      throw DomainError("species wavelengths must be positive");
    if (!(d1_wavelength > d2_wavelength))
      throw DomainError("D1 wavelength must exceed D2 wavelength");
    if (!(d1_linewidth > 0) || !(d2_linewidth > 0))
      throw DomainError("species linewidths must be positive");
  }
};

/// Cesium-133.
template <typename Scalar = double>
AtomSpecies<Scalar> cesium()
{
  AtomSpecies<Scalar> cs;
  cs.name = "Cs133";
  cs.mass = Scalar(132.905451961 * constants::amu);
  cs.d1_wavelength = Scalar(894.59295986e-9);
  cs.d2_wavelength = Scalar(852.34727582e-9);
  cs.d1_linewidth = angular_from_hz(Scalar(4.5612e6));
  cs.d2_linewidth = angular_from_hz(Scalar(5.2227e6));
  cs.hyperfine_splitting = angular_from_hz(Scalar(9.192631770e9));
  cs.lande_gF_upper = Scalar(0.25);
  cs.lande_gF_lower = Scalar(-0.25);
  return cs;
}

/// Reads a `key = value` species file. Keys carry their unit:
/// name, mass_kg, d1_wavelength_m, d2_wavelength_m, d1_linewidth_Hz,
/// d2_linewidth_Hz, hyperfine_splitting_Hz, lande_gF_upper, lande_gF_lower.
/// Linewidths and the splitting are given in Hz and stored as rad/s.
/// Lines starting with '#' are comments.
AtomSpecies<double> load_species(const std::filesystem::path& path);

/// Same format, parsed from an in-memory string. `origin` labels errors.
AtomSpecies<double> parse_species(const std::string& text, const std::string& origin = "<species>");

} // namespace rsc
