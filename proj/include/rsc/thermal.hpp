#pragma once

#include "rsc/axis.hpp"
#include "rsc/constants.hpp"
#include "rsc/errors.hpp"
#include "rsc/log.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace rsc {

/// Occupation probabilities over phonon numbers 0..n_max along one trap axis.
template <typename Scalar = double>
struct PhononDistribution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector probs;
  Axis axis = Axis::x;

  int n_max() const { return static_cast<int>(probs.size()) - 1; }
  Scalar total() const { return probs.sum(); }
  Scalar ground_population() const { return probs.size() ? probs[0] : Scalar(0); }

  Scalar mean() const
  {
    const Vector n = Vector::LinSpaced(probs.size(), Scalar(0), Scalar(probs.size() - 1));
    return probs.dot(n);
  }

  static PhononDistribution fock(int n, int n_max, Axis axis)
  {
    if (n < 0 || n > n_max)
      throw DomainError("Fock state outside truncation");
    PhononDistribution d{Vector::Zero(n_max + 1), axis};
    d.probs[n] = Scalar(1);
    return d;
  }
};

/// Truncation used when no explicit n_max is given: max(40, ceil(20 nbar)).
inline int default_n_max(double nbar)
{
  return std::max(40, static_cast<int>(std::ceil(20.0 * nbar)));
}

/// Probability of n >= n_max in the untruncated Bose-Einstein law.
template <typename Scalar>
Scalar thermal_tail_mass(Scalar nbar, int n_max)
{
  using std::pow;
  if (nbar <= 0)
    return Scalar(0);
  return pow(nbar / (Scalar(1) + nbar), Scalar(n_max));
}

inline constexpr double truncation_tail_tolerance = 1e-6;

/// Bose-Einstein occupation P(n) = nbar^n / (1 + nbar)^(n+1). The mass beyond
/// n_max is folded into the top bin, so the result sums to one exactly.
template <typename Scalar>
PhononDistribution<Scalar> thermal_distribution(Scalar nbar, int n_max, Axis axis = Axis::x)
{
  if (nbar < 0)
    throw DomainError("thermal_distribution requires nbar >= 0");
  if (n_max < 1)
    throw DomainError("thermal_distribution requires n_max >= 1");

  PhononDistribution<Scalar> dist{PhononDistribution<Scalar>::Vector::Zero(n_max + 1), axis};
  const Scalar ratio = nbar / (Scalar(1) + nbar);
  Scalar p = Scalar(1) / (Scalar(1) + nbar);
  for (int n = 0; n < n_max; ++n) {
    dist.probs[n] = p;
    p *= ratio;
  }
  const Scalar tail = thermal_tail_mass(nbar, n_max);
  dist.probs[n_max] = tail;
  if (tail > Scalar(truncation_tail_tolerance))
    log_warning("thermal distribution truncated at n_max=" + std::to_string(n_max) +
                " leaves tail mass " + std::to_string(double(tail)) + " in the top bin");
  return dist;
}

/// Sideband-ratio thermometry: R = nbar / (nbar + 1) inverted.
template <typename Scalar>
Scalar nbar_from_sideband_ratio(Scalar ratio)
{
  if (ratio < 0 || !(ratio < 1))
    throw DomainError("sideband ratio must lie in [0, 1)");
  return ratio / (Scalar(1) - ratio);
}

template <typename Scalar>
Scalar sideband_ratio_from_nbar(Scalar nbar)
{
  if (nbar < 0)
    throw DomainError("nbar must be non-negative");
  return nbar / (nbar + Scalar(1));
}

/// Temperature of a thermal oscillator state, hbar omega / (k_B ln(1 + 1/nbar)).
/// nbar = 0 maps to T = 0.
template <typename Scalar>
Scalar temperature_from_nbar(Scalar nbar, Scalar omega)
{
  if (nbar < 0 || !(omega > 0))
    throw DomainError("temperature_from_nbar requires nbar >= 0 and omega > 0");
  if (nbar == 0)
    return Scalar(0);
  using std::log1p;
  return Scalar(constants::hbar) * omega / (Scalar(constants::k_B) * log1p(Scalar(1) / nbar));
}

/// Classical equipartition estimate nbar hbar omega / k_B.
template <typename Scalar>
Scalar temperature_classical(Scalar nbar, Scalar omega)
{
  if (nbar < 0 || !(omega > 0))
    throw DomainError("temperature_classical requires nbar >= 0 and omega > 0");
  return nbar * Scalar(constants::hbar) * omega / Scalar(constants::k_B);
}

} // namespace rsc
