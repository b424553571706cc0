#pragma once

#include "rsc/constants.hpp"
#include "rsc/errors.hpp"
#include "rsc/species.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <optional>

namespace rsc {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Light-shift energy per unit intensity (J per W/m^2) of a ground-state alkali atom
/// from a two-line (D1 + D2) rotating-wave model with line strengths 1/3 and 2/3.
/// Negative means attractive (red of both lines).
template <typename Scalar>
Scalar scalar_polarizability(const AtomSpecies<Scalar>& species, Scalar wavelength)
{
  using std::abs;
  using std::pow;
  if (!(wavelength > 0))
    throw DomainError("wavelength must be positive");
  const Scalar c = Scalar(constants::c);
  const Scalar omega = Scalar(2) * Scalar(constants::pi) * c / wavelength;
  const Scalar min_detuning = angular_from_hz(Scalar(1e9));

  struct Line {
    Scalar wavelength, linewidth, weight;
  };
  const std::array<Line, 2> lines{Line{species.d1_wavelength, species.d1_linewidth, Scalar(1) / 3},
                                  Line{species.d2_wavelength, species.d2_linewidth, Scalar(2) / 3}};
  Scalar factor = 0;
  for (const Line& line : lines) {
    const Scalar omega0 = Scalar(2) * Scalar(constants::pi) * c / line.wavelength;
    const Scalar detuning = omega - omega0;
    if (abs(detuning) < min_detuning)
      throw DomainError("wavelength within 1 GHz of a D-line resonance");
    factor += line.weight * Scalar(3) * Scalar(constants::pi) * c * c * line.linewidth /
              (Scalar(2) * pow(omega0, 3) * detuning);
  }
  return factor;
}

/// Orthonormal frame (e1, e2) transverse to `axis`; e1 is lab x projected out of `axis`.
template <typename Scalar>
std::array<Vector3<Scalar>, 2> transverse_frame(const Vector3<Scalar>& axis)
{
  const Vector3<Scalar> a = axis.normalized();
  Vector3<Scalar> e1 = Vector3<Scalar>::UnitX() - a.dot(Vector3<Scalar>::UnitX()) * a;
  if (e1.norm() < Scalar(1e-6))
    e1 = Vector3<Scalar>::UnitY() - a.dot(Vector3<Scalar>::UnitY()) * a;
  e1.normalize();
  return {e1, a.cross(e1)};
}

/// Elliptical focused Gaussian beam; waist_x / waist_y lie along the transverse frame.
template <typename Scalar = double>
struct GaussianBeam {
  Scalar wavelength{};
  Scalar power{};
  Scalar waist_x{};
  Scalar waist_y{};
  Vector3<Scalar> propagation_axis = Vector3<Scalar>::UnitZ();
  Vector3<Scalar> focus = Vector3<Scalar>::Zero();

  void validate() const
  {
    if (power < 0)
      throw DomainError("beam power must be non-negative");
    if (!(waist_x > 0) || !(waist_y > 0))
      throw DomainError("beam waists must be positive");
    if (!(wavelength > 0))
      throw DomainError("beam wavelength must be positive");
  }

  Scalar rayleigh_x() const { return Scalar(constants::pi) * waist_x * waist_x / wavelength; }
  Scalar rayleigh_y() const { return Scalar(constants::pi) * waist_y * waist_y / wavelength; }
  Scalar peak_intensity() const { return Scalar(2) * power / (Scalar(constants::pi) * waist_x * waist_y); }

  Scalar intensity(const Vector3<Scalar>& r) const
  {
    using std::exp;
    using std::sqrt;
    const auto frame = transverse_frame(propagation_axis);
    const Vector3<Scalar> d = r - focus;
    const Scalar u = d.dot(propagation_axis.normalized());
    const Scalar s1 = d.dot(frame[0]);
    const Scalar s2 = d.dot(frame[1]);
    const Scalar wx = waist_x * sqrt(Scalar(1) + (u / rayleigh_x()) * (u / rayleigh_x()));
    const Scalar wy = waist_y * sqrt(Scalar(1) + (u / rayleigh_y()) * (u / rayleigh_y()));
    return Scalar(2) * power / (Scalar(constants::pi) * wx * wy) *
           exp(-Scalar(2) * s1 * s1 / (wx * wx) - Scalar(2) * s2 * s2 / (wy * wy));
  }
};

/// Fringe period of two beams crossing at full angle `crossing_angle`.
template <typename Scalar>
Scalar lattice_constant(Scalar wavelength, Scalar crossing_angle)
{
  using std::sin;
  if (!(crossing_angle > 0) || crossing_angle > Scalar(constants::pi))
    throw DomainError("crossing angle must lie in (0, pi]");
  return wavelength / (Scalar(2) * sin(crossing_angle / Scalar(2)));
}

/// Two equal beams crossing at +-half_angle about `bisector`, producing fringes
/// along `lattice_axis`. `center` sits on a dark fringe. The Gaussian envelope is
/// taken about the bisector line; Rayleigh divergence is neglected.
template <typename Scalar = double>
struct CrossedLattice {
  Scalar wavelength{};
  Scalar power_per_beam{};
  Scalar waist{};
  Scalar half_angle{};
  Vector3<Scalar> polarization = Vector3<Scalar>::UnitX();
  Vector3<Scalar> lattice_axis = Vector3<Scalar>::UnitZ();
  Vector3<Scalar> bisector = Vector3<Scalar>::UnitY();
  Vector3<Scalar> center = Vector3<Scalar>::Zero();

  void validate() const
  {
    if (power_per_beam < 0)
      throw DomainError("lattice power must be non-negative");
    if (!(waist > 0))
      throw DomainError("lattice waist must be positive");
    if (!(half_angle > 0 && half_angle < Scalar(constants::pi) / 2))
      throw DomainError("lattice half angle must lie in (0, pi/2)");
    if (!(wavelength > 0))
      throw DomainError("lattice wavelength must be positive");
  }

  Scalar period() const { return lattice_constant(wavelength, Scalar(2) * half_angle); }
  Scalar beam_peak_intensity() const
  {
    return Scalar(2) * power_per_beam / (Scalar(constants::pi) * waist * waist);
  }

  std::array<Vector3<Scalar>, 2> beam_directions() const
  {
    using std::cos;
    using std::sin;
    const Vector3<Scalar> b = bisector.normalized();
    const Vector3<Scalar> l = lattice_axis.normalized();
    return {cos(half_angle) * b + sin(half_angle) * l, cos(half_angle) * b - sin(half_angle) * l};
  }

  /// Overlap of the two beams' transverse polarisations.
  Scalar visibility() const
  {
    const auto k = beam_directions();
    const Vector3<Scalar> p = polarization.normalized();
    const Vector3<Scalar> e1 = (p - p.dot(k[0]) * k[0]).normalized();
    const Vector3<Scalar> e2 = (p - p.dot(k[1]) * k[1]).normalized();
    return e1.dot(e2);
  }

  Scalar intensity(const Vector3<Scalar>& r) const
  {
    using std::cos;
    using std::exp;
    const Vector3<Scalar> d = r - center;
    const Vector3<Scalar> b = bisector.normalized();
    const Vector3<Scalar> transverse = d - d.dot(b) * b;
    const Scalar envelope = exp(-Scalar(2) * transverse.squaredNorm() / (waist * waist));
    const Scalar phase = Scalar(2) * Scalar(constants::pi) * d.dot(lattice_axis.normalized()) / period();
    return Scalar(2) * beam_peak_intensity() * envelope * (Scalar(1) - visibility() * cos(phase));
  }
};

template <typename Scalar = double>
struct TrapModel {
  GaussianBeam<Scalar> rodt;
  std::optional<CrossedLattice<Scalar>> lattice;
  AtomSpecies<Scalar> species;

  void validate() const
  {
    rodt.validate();
    if (lattice)
      lattice->validate();
    species.validate();
  }
};

template <typename Scalar>
Scalar potential_at(const TrapModel<Scalar>& model, const Vector3<Scalar>& r)
{
  Scalar u = scalar_polarizability(model.species, model.rodt.wavelength) * model.rodt.intensity(r);
  if (model.lattice)
    u += scalar_polarizability(model.species, model.lattice->wavelength) * model.lattice->intensity(r);
  return u;
}

/// Coordinate descent from `start` with step halving down to `tolerance`.
/// Throws NumericalError if the walk leaves a ball of radius `max_excursion`.
template <typename Scalar, typename Potential>
Vector3<Scalar> find_potential_minimum(const Potential& potential, Vector3<Scalar> start,
                                       Scalar initial_step = Scalar(50e-9), Scalar tolerance = Scalar(1e-9),
                                       Scalar max_excursion = Scalar(50e-6))
{
  const Vector3<Scalar> origin = start;
  Vector3<Scalar> r = start;
  Scalar best = potential(r);
  Scalar step = initial_step;
  int iterations = 0;
  while (step >= tolerance) {
    bool moved = false;
    for (int axis = 0; axis < 3; ++axis) {
      for (Scalar sign : {Scalar(1), Scalar(-1)}) {
        for (;;) {
          Vector3<Scalar> trial = r;
          trial[axis] += sign * step;
          const Scalar value = potential(trial);
          if (!(value < best))
            break;
          r = trial;
          best = value;
          moved = true;
          if ((r - origin).norm() > max_excursion)
            throw NumericalError("no potential minimum near the starting point");
          if (++iterations > 1000000)
            throw NumericalError("minimum search did not terminate");
        }
      }
    }
    if (!moved)
      step /= Scalar(2);
  }
  return r;
}

/// Fourth-order central second derivative along `direction`.
template <typename Scalar, typename Potential>
Scalar curvature_along(const Potential& potential, const Vector3<Scalar>& r, const Vector3<Scalar>& direction,
                       Scalar step)
{
  const Vector3<Scalar> d = direction.normalized() * step;
  return (-potential(r + 2 * d) + Scalar(16) * potential(r + d) - Scalar(30) * potential(r) +
          Scalar(16) * potential(r - d) - potential(r - 2 * d)) /
         (Scalar(12) * step * step);
}

inline constexpr double curvature_step = 5e-9;

/// Angular trap frequencies along x, y, z at the minimum nearest `start`.
template <typename Scalar, typename Potential>
Vector3<Scalar> trap_frequencies(const Potential& potential, Scalar mass, const Vector3<Scalar>& start)
{
  using std::sqrt;
  const Vector3<Scalar> minimum = find_potential_minimum<Scalar>(potential, start);
  Vector3<Scalar> omegas;
  for (int axis = 0; axis < 3; ++axis) {
    const Scalar k =
        curvature_along<Scalar>(potential, minimum, Vector3<Scalar>::Unit(axis), Scalar(curvature_step));
    if (k == Scalar(0))
      throw NumericalError("flat potential: no trap minimum");
    if (k < 0)
      throw NumericalError("negative curvature: potential has a saddle at the search point");
    omegas[axis] = sqrt(k / mass);
  }
  return omegas;
}

template <typename Scalar>
Vector3<Scalar> trap_frequencies(const TrapModel<Scalar>& model)
{
  model.validate();
  auto potential = [&](const Vector3<Scalar>& r) { return potential_at(model, r); };
  return trap_frequencies<Scalar>(potential, model.species.mass, model.rodt.focus);
}

/// U(escape asymptote) - U(minimum). Both beam potentials vanish far from the focus,
/// so the asymptote is sampled well outside every beam.
template <typename Scalar>
Scalar trap_depth(const TrapModel<Scalar>& model)
{
  using std::isfinite;
  model.validate();
  auto potential = [&](const Vector3<Scalar>& r) { return potential_at(model, r); };
  const Vector3<Scalar> minimum = find_potential_minimum<Scalar>(potential, model.rodt.focus);
  const Vector3<Scalar> far = model.rodt.focus + Vector3<Scalar>(1, 1, 1).normalized() * Scalar(1);
  const Scalar asymptote = potential(far);
  const Scalar bottom = potential(minimum);
  if (!isfinite(asymptote) || !isfinite(bottom))
    throw NumericalError("potential is unbounded");
  return asymptote - bottom;
}

/// Harmonic estimates for a bare Gaussian beam of depth `depth` (J).
template <typename Scalar>
Scalar gaussian_radial_frequency(Scalar depth, Scalar mass, Scalar waist)
{
  using std::sqrt;
  return sqrt(Scalar(4) * depth / (mass * waist * waist));
}

template <typename Scalar>
Scalar gaussian_axial_frequency(Scalar depth, Scalar mass, const GaussianBeam<Scalar>& beam)
{
  using std::sqrt;
  const Scalar zx = beam.rayleigh_x(), zy = beam.rayleigh_y();
  return sqrt(depth * (Scalar(1) / (zx * zx) + Scalar(1) / (zy * zy)) / mass);
}

/// Samples of (coordinate, potential) along `direction` through `through`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 2> potential_cut(const TrapModel<Scalar>& model,
                                                       const Vector3<Scalar>& through,
                                                       const Vector3<Scalar>& direction, Scalar half_span,
                                                       int points)
{
  if (points < 2)
    throw DomainError("potential cut needs at least two points");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> cut(points, 2);
  const Vector3<Scalar> unit = direction.normalized();
  for (int i = 0; i < points; ++i) {
    const Scalar s = -half_span + Scalar(2) * half_span * Scalar(i) / Scalar(points - 1);
    cut(i, 0) = s;
    cut(i, 1) = potential_at(model, Vector3<Scalar>(through + s * unit));
  }
  return cut;
}

} // namespace rsc
