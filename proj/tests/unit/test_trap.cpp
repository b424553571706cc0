#include <doctest.h>

#include "rsc/commands.hpp"
#include "rsc/lamb_dicke.hpp"
#include "rsc/trap.hpp"
#include "rsc/zeeman.hpp"

#include <cmath>

using namespace rsc;

namespace {

TrapModel<double> rodt_model(double power)
{
  TrapModel<double> m;
  m.species = cesium<double>();
  m.rodt.wavelength = 1052e-9;
  m.rodt.power = power;
  m.rodt.waist_x = 1.7e-6;
  m.rodt.waist_y = 1.6e-6;
  return m;
}

} // namespace

TEST_SUITE("trap")
{
  TEST_CASE("frequencies of a harmonic potential are recovered")
  {
    const double mass = cesium<double>().mass;
    const Eigen::Vector3d omega(2 * constants::pi * 59.5e3, 2 * constants::pi * 69.7e3, 2 * constants::pi * 32.3e3);
    const Eigen::Vector3d centre(0.2e-6, -0.1e-6, 0.3e-6);
    auto harmonic = [&](const Eigen::Vector3d& r) {
      const Eigen::Vector3d d = r - centre;
      return -1e-26 + 0.5 * mass * (omega.array().square() * d.array().square()).sum();
    };
    const Eigen::Vector3d got = trap_frequencies<double>(harmonic, mass, Eigen::Vector3d::Zero());
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(got[i] / omega[i] - 1.0) < 1e-3);
  }

  TEST_CASE("Gaussian beam frequencies match the harmonic expansion")
  {
    const auto m = rodt_model(35e-3);
    const double depth = trap_depth(m);
    const Eigen::Vector3d w = trap_frequencies(m);
    CHECK(depth > 0);
    CHECK(w[0] == doctest::Approx(gaussian_radial_frequency(depth, m.species.mass, m.rodt.waist_x)).epsilon(1e-3));
    CHECK(w[1] == doctest::Approx(gaussian_radial_frequency(depth, m.species.mass, m.rodt.waist_y)).epsilon(1e-3));
    CHECK(w[2] == doctest::Approx(gaussian_axial_frequency(depth, m.species.mass, m.rodt)).epsilon(1e-3));
    // Depth scales linearly with power, frequencies with its square root.
    const auto half = rodt_model(17.5e-3);
    CHECK(trap_depth(half) == doctest::Approx(0.5 * depth).epsilon(1e-9));
    CHECK(trap_frequencies(half)[0] == doctest::Approx(w[0] / std::sqrt(2.0)).epsilon(1e-3));
  }

  TEST_CASE("polarisability signs")
  {
    const auto cs = cesium<double>();
    CHECK(scalar_polarizability(cs, 1052e-9) < 0); // red of both lines: attractive
    CHECK(scalar_polarizability(cs, 780e-9) > 0);  // blue of both lines: repulsive
    CHECK(scalar_polarizability(cs, 870e-9) < 0);  // between the lines the stronger D2 term wins
  }

  TEST_CASE("lattice constant formula")
  {
    const double a = lattice_constant(780e-9, 18.0 * constants::pi / 180.0);
    CHECK(a == doctest::Approx(780e-9 / (2.0 * std::sin(9.0 * constants::pi / 180.0))));
    CHECK(a * 1e6 == doctest::Approx(2.493).epsilon(1e-3));
    CHECK(lattice_constant(780e-9, constants::pi) == doctest::Approx(390e-9));
    CHECK_THROWS_AS(lattice_constant(780e-9, 0.0), DomainError);
  }

  TEST_CASE("zero lattice power leaves the beam-only trap")
  {
    auto cfg = resolve_config("paper-cs", {{"trap", {{"lattice", {{"power_per_beam_mW", 0}}}}}});
    const auto report = compute_trap_report(cfg);
    for (int i = 0; i < 3; ++i)
      CHECK(report.frequencies[i] == doctest::Approx(report.rodt_frequencies[i]).epsilon(1e-9));
    CHECK(report.depth == doctest::Approx(report.rodt_depth));
  }

  TEST_CASE("lattice stiffens the axial direction only")
  {
    const auto cfg = resolve_config("paper-cs", nlohmann::json());
    const auto report = compute_trap_report(cfg);
    CHECK(report.frequencies[2] > 3.0 * report.rodt_frequencies[2]);
    CHECK(report.frequencies[0] == doctest::Approx(report.rodt_frequencies[0]).epsilon(1e-2));
    CHECK(report.analytic_radial_x == doctest::Approx(report.rodt_frequencies[0]).epsilon(1e-3));
    REQUIRE(report.lattice_constant);
    CHECK(*report.lattice_constant == doctest::Approx(lattice_constant(780e-9, 18.0 * constants::pi / 180.0)));
  }

  TEST_CASE("potential cut is symmetric about the focus")
  {
    const auto m = rodt_model(35e-3);
    const auto cut = potential_cut(m, Eigen::Vector3d::Zero().eval(), Eigen::Vector3d::UnitX().eval(), 5e-6, 101);
    CHECK(cut.rows() == 101);
    CHECK(cut(0, 0) == doctest::Approx(-5e-6));
    for (int i = 0; i < 50; ++i)
      CHECK(cut(i, 1) == doctest::Approx(cut(100 - i, 1)).epsilon(1e-12));
    CHECK(cut(50, 1) == doctest::Approx(-trap_depth(m)).epsilon(1e-9));
  }

  TEST_CASE("Lamb-Dicke parameter from geometry")
  {
    const double mass = cesium<double>().mass;
    const double omega = 2 * constants::pi * 50e3;
    const double x0 = oscillator_length(mass, omega);
    CHECK(x0 == doctest::Approx(std::sqrt(constants::hbar / (2 * mass * omega))));
    RamanGeometry<double> g;
    g.wavelength = 894.6e-9;
    const auto set = raman_lamb_dicke_from_geometry(g, mass, Eigen::Vector3d(omega, omega, omega));
    const double k = 2 * constants::pi / g.wavelength;
    CHECK(set.eta_x == doctest::Approx(k * x0));
    CHECK(set.eta_y == doctest::Approx(k * x0));
    CHECK(set.eta_z == doctest::Approx(k * x0));
  }

  TEST_CASE("Zeeman schemes differ by a factor of seven")
  {
    const auto cs = cesium<double>();
    const auto single = make_zeeman_scheme(ZeemanLabel::SingleManifold, cs);
    const auto inter = make_zeeman_scheme(ZeemanLabel::InterManifold, cs);
    CHECK(inter.slope == doctest::Approx(7.0 * single.slope).epsilon(1e-15));
    CHECK(zeeman_drift_detuning(inter, 1e-7) == doctest::Approx(zeeman_drift_detuning(single, 7e-7)).epsilon(1e-15));
    // g_F mu_B / h = 350 kHz/G for the single-manifold transition.
    CHECK(zeeman_drift_detuning(single, 1e-4) / (2 * constants::pi) == doctest::Approx(349.9e3).epsilon(1e-3));
  }
}
