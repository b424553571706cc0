#include <doctest.h>

#include "rsc/pulse.hpp"

#include <cmath>
#include <random>

using namespace rsc;

namespace {

// Closed-form excitation for a constant drive: (W/W')^2 sin^2(W' T / 2).
double rabi_formula(double omega, double detuning, double duration)
{
  const double w = std::sqrt(omega * omega + detuning * detuning);
  const double s = std::sin(0.5 * w * duration);
  return omega * omega / (w * w) * s * s;
}

double simpson(const Envelope<double>& e, int intervals)
{
  const double a = -0.5 * e.window, b = 0.5 * e.window;
  const double h = (b - a) / intervals;
  double sum = e.rabi_at(a) + e.rabi_at(b);
  for (int i = 1; i < intervals; ++i)
    sum += (i % 2 ? 4.0 : 2.0) * e.rabi_at(a + i * h);
  return sum * h / 3.0;
}

} // namespace

TEST_SUITE("pulse")
{
  TEST_CASE("square pulse matches the Rabi formula on a 100-point detuning grid")
  {
    const double omega = 2.0 * constants::pi * 20e3;
    const double duration = 40e-6;
    const auto env = square_envelope(omega, duration);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double delta = -5.0 * omega + 10.0 * omega * i / 99.0;
      worst = std::max(worst, std::abs(transfer_probability(env, delta) - rabi_formula(omega, delta, duration)));
    }
    CHECK(worst < 1e-8);
  }

  TEST_CASE("square pulse inside a longer window only drives for 2 tau")
  {
    Envelope<double> env{EnvelopeShape::Square, 2.0 * constants::pi * 10e3, 20e-6, 100e-6};
    const double delta = 2.0 * constants::pi * 7e3;
    CHECK(transfer_probability(env, delta) == doctest::Approx(rabi_formula(env.peak_rabi, delta, 40e-6)).epsilon(1e-8));
  }

  TEST_CASE("propagation preserves the norm")
  {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    const auto env = gaussian_envelope(2.0 * constants::pi * 30e3, 25e-6, 300e-6);
    for (int k = 0; k < 20; ++k) {
      TwoLevelState<double> s;
      s.amplitudes << std::complex<double>(g(rng), g(rng)), std::complex<double>(g(rng), g(rng));
      s.amplitudes.normalize();
      const double delta = 2.0 * constants::pi * 1e3 * (k - 10);
      CHECK(std::abs(propagate_two_level(s, env, delta).norm() - 1.0) < 1e-9);
    }
  }

  TEST_CASE("unnormalised input is rejected")
  {
    TwoLevelState<double> s;
    s.amplitudes << 1.0, 1.0;
    CHECK_THROWS_AS(propagate_two_level(s, gaussian_envelope(1e4, 25e-6, 300e-6), 0.0), DomainError);
  }

  TEST_CASE("pulse area agrees with Simpson quadrature")
  {
    for (double window : {50e-6, 100e-6, 300e-6}) {
      const auto env = gaussian_envelope(2.0 * constants::pi * 12e3, 25e-6, window);
      CHECK(pulse_area(env) == doctest::Approx(simpson(env, 20000)).epsilon(1e-10));
    }
    const auto sq = square_envelope(3.0e4, 40e-6);
    CHECK(pulse_area(sq) == doctest::Approx(3.0e4 * 40e-6).epsilon(1e-14));
  }

  TEST_CASE("weak Gaussian pulse follows first-order perturbation theory")
  {
    // P(delta) = (Omega tau sqrt(pi))^2 exp(-2 delta^2 tau^2) when the area is small.
    const double tau = 25e-6;
    const double omega = 0.002 / (tau * std::sqrt(constants::pi));
    const auto env = gaussian_envelope(omega, tau, 400e-6);
    for (double khz : {0.0, 2.0, 5.0, 9.0}) {
      const double delta = 2.0 * constants::pi * khz * 1e3;
      const double expected = std::pow(omega * tau * std::sqrt(constants::pi), 2) * std::exp(-2.0 * delta * delta * tau * tau);
      CHECK(transfer_probability(env, delta) == doctest::Approx(expected).epsilon(1e-3));
    }
  }

  TEST_CASE("calibrated pulse has area pi on the target sideband")
  {
    const double eta = 0.23, tau = 25e-6, window = 300e-6;
    for (int n : {1, 2, 5}) {
      const double carrier = calibrate_pi_pulse(eta, tau, window, n);
      const double sideband = sideband_rabi(carrier, eta, n, -1);
      CHECK(pulse_area(gaussian_envelope(sideband, tau, window)) == doctest::Approx(constants::pi).epsilon(1e-12));
      CHECK(transfer_probability(gaussian_envelope(sideband, tau, window), 0.0) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }

  TEST_CASE("sideband couplings follow the sqrt(n) ladder")
  {
    const double c = 1.0e5, eta = 0.2;
    for (int n = 1; n < 30; ++n) {
      CHECK(sideband_rabi(c, eta, n, -1) == doctest::Approx(c * eta * std::sqrt(double(n))).epsilon(1e-15));
      CHECK(sideband_rabi(c, eta, n - 1, 1) == doctest::Approx(sideband_rabi(c, eta, n, -1)).epsilon(1e-15));
    }
    CHECK(sideband_rabi(c, eta, 0, 0) == doctest::Approx(c * (1.0 - eta * eta / 2.0)));
    CHECK_THROWS_AS(sideband_rabi(c, eta, 0, -1), DomainError);
    CHECK_THROWS_AS(sideband_rabi(c, eta, 3, 2), DomainError);
  }

  TEST_CASE("two-photon Rabi frequency")
  {
    const double o1 = 2.0 * constants::pi * 122.6e6, o2 = 2.0 * constants::pi * 28.6e6;
    const double delta = -2.0 * constants::pi * 70e9;
    CHECK(carrier_peak_rabi(o1, o2, delta) == doctest::Approx(o1 * o2 / (2.0 * delta)));
    CHECK_THROWS_AS(carrier_peak_rabi(o1, o2, 0.0), DomainError);
  }

  TEST_CASE("envelope validation")
  {
    CHECK_THROWS_AS(gaussian_envelope(1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(gaussian_envelope(1.0, 25e-6, 10e-6), DomainError);
    CHECK_THROWS_AS(gaussian_envelope(-1.0, 25e-6, 100e-6), DomainError);
    CHECK(transfer_probability(gaussian_envelope(0.0, 25e-6, 100e-6), 0.0) == 0.0);
  }
}
