#pragma once

#include "rsc/axis.hpp"
#include "rsc/constants.hpp"
#include "rsc/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace rsc {

enum class EnvelopeShape { Gaussian, Square };

/// Time profile of a Rabi frequency, centred on t = 0.
/// Gaussian: peak_rabi * exp(-t^2 / (4 tau^2)) for |t| <= window / 2.
/// Square: peak_rabi for |t| <= tau (tau is the half duration).
template <typename Scalar = double>
struct Envelope {
  EnvelopeShape shape = EnvelopeShape::Gaussian;
  Scalar peak_rabi{}; // rad/s
  Scalar tau{};       // s
  Scalar window{};    // s, total gate time

  void validate() const
  {
    if (peak_rabi < 0)
      throw DomainError("envelope peak Rabi frequency must be non-negative");
    if (!(tau > 0))
      throw DomainError("envelope tau must be positive");
    if (window < Scalar(2) * tau * Scalar(1 - 1e-12))
      throw DomainError("envelope window must be at least 2 tau");
  }

  Scalar rabi_at(Scalar t) const
  {
    using std::abs;
    using std::exp;
    if (abs(t) > window / 2)
      return Scalar(0);
    if (shape == EnvelopeShape::Square)
      return abs(t) <= tau ? peak_rabi : Scalar(0);
    return peak_rabi * exp(-t * t / (Scalar(4) * tau * tau));
  }

  Envelope scaled(Scalar factor) const
  {
    Envelope e = *this;
    e.peak_rabi *= factor;
    return e;
  }
};

template <typename Scalar = double>
Envelope<Scalar> gaussian_envelope(Scalar peak_rabi, Scalar tau, Scalar window)
{
  Envelope<Scalar> e{EnvelopeShape::Gaussian, peak_rabi, tau, window};
  e.validate();
  return e;
}

template <typename Scalar = double>
Envelope<Scalar> square_envelope(Scalar peak_rabi, Scalar duration)
{
  Envelope<Scalar> e{EnvelopeShape::Square, peak_rabi, duration / 2, duration};
  e.validate();
  return e;
}

/// A Raman pulse addressing one trap axis. `envelope.peak_rabi` is the carrier
/// (two-photon) Rabi frequency; sideband couplings derive from it and `eta`.
/// `detuning` is measured from the addressed sideband resonance.
template <typename Scalar = double>
struct RamanPulse {
  Envelope<Scalar> envelope;
  Scalar detuning{};        // rad/s
  Axis axis = Axis::z;
  Scalar eta{};             // Raman Lamb-Dicke parameter on `axis`
  int target_sideband = -1; // delta n
  Scalar trap_frequency{};  // rad/s, spacing of the sideband ladder on `axis`

  void validate() const
  {
    envelope.validate();
    if (!(eta > 0 && eta < 1))
      throw DomainError("Raman pulse eta must lie in (0, 1)");
    if (target_sideband < -2 || target_sideband > 2)
      throw DomainError("target sideband must satisfy |delta n| <= 2");
    if (!(trap_frequency > 0))
      throw DomainError("Raman pulse needs a positive trap frequency");
  }
};

/// Amplitudes of the lower (|4,4>) and upper (|4,3>) states.
template <typename Scalar = double>
struct TwoLevelState {
  using Complex = std::complex<Scalar>;
  Eigen::Matrix<Complex, 2, 1> amplitudes{Complex(1), Complex(0)};

  static TwoLevelState ground() { return {}; }
  Scalar ground_population() const { return std::norm(amplitudes[0]); }
  Scalar excited_population() const { return std::norm(amplitudes[1]); }
  Scalar norm() const { return amplitudes.squaredNorm(); }
};

/// Peak two-photon Rabi frequency omega1 * omega2 / (2 delta); sign follows delta.
template <typename Scalar>
Scalar carrier_peak_rabi(Scalar omega1, Scalar omega2, Scalar delta)
{
  if (delta == Scalar(0))
    throw DomainError("one-photon detuning must be non-zero");
  return omega1 * omega2 / (Scalar(2) * delta);
}

/// Rabi frequency of |n> -> |n + delta_n> to leading order in eta.
template <typename Scalar>
Scalar sideband_rabi(Scalar carrier_rabi, Scalar eta, int n, int delta_n)
{
  using std::sqrt;
  if (n < 0)
    throw DomainError("phonon number must be non-negative");
  switch (delta_n) {
  case -1:
    if (n == 0)
      throw DomainError("red sideband from n = 0 is forbidden");
    return carrier_rabi * eta * sqrt(Scalar(n));
  case 0:
    return carrier_rabi * (Scalar(1) - eta * eta * Scalar(2 * n + 1) / Scalar(2));
  case 1:
    return carrier_rabi * eta * sqrt(Scalar(n + 1));
  default:
    throw DomainError("sideband_rabi supports delta_n in {-1, 0, +1}");
  }
}

/// Integral of the Rabi envelope over its window.
template <typename Scalar>
Scalar pulse_area(const Envelope<Scalar>& envelope)
{
  using std::erf;
  using std::min;
  using std::sqrt;
  envelope.validate();
  if (envelope.shape == EnvelopeShape::Square)
    return envelope.peak_rabi * min(Scalar(2) * envelope.tau, envelope.window);
  return envelope.peak_rabi * Scalar(2) * envelope.tau * sqrt(Scalar(constants::pi)) *
         erf(envelope.window / (Scalar(4) * envelope.tau));
}

template <typename Scalar = double>
struct PropagatorOptions {
  Scalar tolerance = Scalar(1e-10); // local error bound per step
  long max_steps = 2000000;
};

namespace detail {

template <typename Scalar>
using State2 = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

// Rotating-frame two-level Schroedinger equation:
//   i d/dt (g, e) = [[0, Omega/2], [Omega/2, -delta]] (g, e)
template <typename Scalar>
State2<Scalar> two_level_rhs(const State2<Scalar>& psi, Scalar rabi, Scalar detuning)
{
  const std::complex<Scalar> minus_i(0, -1);
  State2<Scalar> d;
  d[0] = minus_i * (rabi / Scalar(2)) * psi[1];
  d[1] = minus_i * ((rabi / Scalar(2)) * psi[0] - detuning * psi[1]);
  return d;
}

// Dormand-Prince 5(4) with local-error control on [t0, t1].
template <typename Scalar, typename RabiFn>
State2<Scalar> dormand_prince(State2<Scalar> psi, Scalar t0, Scalar t1, const RabiFn& rabi, Scalar detuning,
                              const PropagatorOptions<Scalar>& options, long& steps)
{
  using std::abs;
  using std::max;
  using std::min;
  using std::pow;
  if (!(t1 > t0))
    return psi;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto f = [&](Scalar t, const State2<Scalar>& y) { return two_level_rhs(y, rabi(t), detuning); };

  const Scalar scale = max(abs(detuning), abs(rabi(Scalar(0.5) * (t0 + t1)))) + Scalar(1) / (t1 - t0);
  Scalar h = min(t1 - t0, Scalar(0.05) / scale);
  Scalar t = t0;
  State2<Scalar> k1 = f(t, psi);
  while (t < t1) {
    if (++steps > options.max_steps)
      throw NumericalError("two-level propagation exceeded the step budget");
    if (t + h > t1)
      h = t1 - t;
    const State2<Scalar> k2 = f(t + Scalar(c2) * h, psi + h * Scalar(a21) * k1);
    const State2<Scalar> k3 = f(t + Scalar(c3) * h, psi + h * (Scalar(a31) * k1 + Scalar(a32) * k2));
    const State2<Scalar> k4 =
        f(t + Scalar(c4) * h, psi + h * (Scalar(a41) * k1 + Scalar(a42) * k2 + Scalar(a43) * k3));
    const State2<Scalar> k5 = f(t + Scalar(c5) * h, psi + h * (Scalar(a51) * k1 + Scalar(a52) * k2 +
                                                               Scalar(a53) * k3 + Scalar(a54) * k4));
    const State2<Scalar> k6 = f(t + h, psi + h * (Scalar(a61) * k1 + Scalar(a62) * k2 + Scalar(a63) * k3 +
                                                  Scalar(a64) * k4 + Scalar(a65) * k5));
    const State2<Scalar> next =
        psi + h * (Scalar(b1) * k1 + Scalar(b3) * k3 + Scalar(b4) * k4 + Scalar(b5) * k5 + Scalar(b6) * k6);
    const State2<Scalar> k7 = f(t + h, next);
    const State2<Scalar> err = h * (Scalar(e1) * k1 + Scalar(e3) * k3 + Scalar(e4) * k4 + Scalar(e5) * k5 +
                                    Scalar(e6) * k6 + Scalar(e7) * k7);
    const Scalar error = err.template lpNorm<Eigen::Infinity>() / options.tolerance;
    if (!(error == error))
      throw NumericalError("two-level propagation produced NaN");
    if (error <= Scalar(1)) {
      t += h;
      // Projection back onto the unit sphere: the exact flow is norm preserving,
      // explicit stages alone drift by ~1e-8 over long high-n pulses.
      // The right-hand side is linear in psi, so k7 rescales with it.
      const Scalar inv = Scalar(1) / std::sqrt(next.squaredNorm());
      psi = next * inv;
      k1 = k7 * inv;
    }
    const Scalar factor =
        error == Scalar(0) ? Scalar(5) : min(Scalar(5), max(Scalar(0.2), Scalar(0.9) * pow(error, Scalar(-0.2))));
    h *= factor;
    if (h < (t1 - t0) * Scalar(1e-14))
      throw NumericalError("two-level propagation step size underflow");
  }
  return psi;
}

} // namespace detail

/// Evolves `state` through `envelope` at constant two-photon detuning (rad/s).
template <typename Scalar>
TwoLevelState<Scalar> propagate_two_level(const TwoLevelState<Scalar>& state, const Envelope<Scalar>& envelope,
                                          Scalar detuning, const PropagatorOptions<Scalar>& options = {})
{
  envelope.validate();
  using std::abs;
  if (abs(state.norm() - Scalar(1)) > Scalar(1e-9))
    throw DomainError("two-level input state is not normalised");

  const Scalar half = envelope.window / 2;
  std::vector<Scalar> breaks{-half};
  if (envelope.shape == EnvelopeShape::Square && envelope.tau < half) {
    breaks.push_back(-envelope.tau);
    breaks.push_back(envelope.tau);
  }
  breaks.push_back(half);

  auto psi = state.amplitudes;
  long steps = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const Scalar mid = Scalar(0.5) * (breaks[i] + breaks[i + 1]);
    // Inside a segment the square envelope is constant; sampling at the midpoint
    // keeps the breakpoints out of the stage evaluations.
    auto rabi = [&](Scalar t) {
      return envelope.shape == EnvelopeShape::Square ? envelope.rabi_at(mid) : envelope.rabi_at(t);
    };
    psi = detail::dormand_prince<Scalar>(psi, breaks[i], breaks[i + 1], rabi, detuning, options, steps);
  }
  TwoLevelState<Scalar> out;
  out.amplitudes = psi;
  return out;
}

/// Population transferred out of the lower state starting from it.
template <typename Scalar>
Scalar transfer_probability(const Envelope<Scalar>& envelope, Scalar detuning,
                            const PropagatorOptions<Scalar>& options = {})
{
  if (envelope.peak_rabi == Scalar(0))
    return Scalar(0);
  return propagate_two_level(TwoLevelState<Scalar>::ground(), envelope, detuning, options).excited_population();
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> spectral_response(const Envelope<Scalar>& envelope,
                                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& detunings,
                                                           const PropagatorOptions<Scalar>& options = {})
{
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(detunings.size());
  for (Eigen::Index i = 0; i < detunings.size(); ++i)
    out[i] = transfer_probability(envelope, detunings[i], options);
  return out;
}

/// Peak carrier Rabi frequency making the |target_n> -> |target_n - 1> sideband a pi pulse.
template <typename Scalar>
Scalar calibrate_pi_pulse(Scalar eta, Scalar tau, Scalar window, int target_n)
{
  using std::sqrt;
  if (target_n < 1)
    throw DomainError("calibration target must have n >= 1");
  if (!(eta > 0))
    throw DomainError("calibration needs eta > 0");
  const Scalar unit_area = pulse_area(gaussian_envelope(Scalar(1), tau, window));
  return Scalar(constants::pi) / (unit_area * eta * sqrt(Scalar(target_n)));
}

} // namespace rsc
