#include <doctest.h>

#include "rsc/lamb_dicke.hpp"
#include "rsc/thermal.hpp"

#include <cmath>

using namespace rsc;

TEST_SUITE("thermal")
{
  TEST_CASE("thermal distribution is normalised with the requested mean")
  {
    for (double nbar : {0.0, 0.05, 0.5, 1.0, 2.61, 4.25, 5.33, 6.0}) {
      const auto d = thermal_distribution(nbar, default_n_max(nbar));
      CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(d.mean() - nbar) < 1e-3);
      // Geometric ratio between neighbours.
      if (nbar > 0)
        CHECK(d.probs[3] / d.probs[2] == doctest::Approx(nbar / (nbar + 1.0)).epsilon(1e-12));
    }
  }

  TEST_CASE("thermal distribution rejects bad input")
  {
    CHECK_THROWS_AS(thermal_distribution(-0.1, 10), DomainError);
    CHECK_THROWS_AS(thermal_distribution(1.0, 0), DomainError);
  }

  TEST_CASE("Fock state")
  {
    const auto d = PhononDistribution<double>::fock(3, 10, Axis::y);
    CHECK(d.mean() == 3.0);
    CHECK(d.axis == Axis::y);
    CHECK_THROWS_AS(PhononDistribution<double>::fock(11, 10, Axis::y), DomainError);
  }

  TEST_CASE("sideband ratio and nbar are inverse maps")
  {
    for (double nbar : {0.0, 0.05, 0.5, 1.0, 2.61, 40.0}) {
      const double r = sideband_ratio_from_nbar(nbar);
      CHECK(r == doctest::Approx(nbar / (nbar + 1.0)));
      CHECK(nbar_from_sideband_ratio(r) == doctest::Approx(nbar).epsilon(1e-12));
    }
    CHECK_THROWS_AS(nbar_from_sideband_ratio(1.0), DomainError);
    CHECK_THROWS_AS(nbar_from_sideband_ratio(-0.1), DomainError);
  }

  TEST_CASE("temperature inverts the Bose-Einstein occupation")
  {
    const double omega = 2.0 * constants::pi * 59.5e3;
    for (double nbar : {0.05, 0.5, 4.25}) {
      const double t = temperature_from_nbar(nbar, omega);
      const double back = 1.0 / std::expm1(constants::hbar * omega / (constants::k_B * t));
      CHECK(back == doctest::Approx(nbar).epsilon(1e-12));
      CHECK(temperature_classical(nbar, omega) == doctest::Approx(nbar * constants::hbar * omega / constants::k_B));
    }
    CHECK(temperature_from_nbar(0.0, omega) == 0.0);
  }

  TEST_CASE("effective Lamb-Dicke parameter")
  {
    CHECK(effective_lamb_dicke(0.23, 5.33) == doctest::Approx(0.23 * std::sqrt(2 * 5.33 + 1)));
    CHECK(effective_lamb_dicke(0.16, 0.0) == doctest::Approx(0.16));
  }
}
