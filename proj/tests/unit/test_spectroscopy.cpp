#include <doctest.h>

#include "rsc/config.hpp"
#include "rsc/spectroscopy.hpp"

#include <cmath>

using namespace rsc;

namespace {

const ExperimentConfig& preset()
{
  static const ExperimentConfig cfg = resolve_config("paper-cs", nlohmann::json());
  return cfg;
}

constexpr int kNMax = 125;

const SidebandResponse& response_y()
{
  static const SidebandResponse r = [] {
    const auto probe = cooling_pulse(preset(), Axis::y);
    return sideband_response(probe, sideband_grid_hz(probe.trap_frequency, 60), kNMax);
  }();
  return r;
}

double omega_y() { return cooling_pulse(preset(), Axis::y).trap_frequency; }

FitOptions noiseless_options()
{
  FitOptions o;
  o.bootstrap_resamples = 0;
  o.probe_tau = 25e-6;
  return o;
}

} // namespace

TEST_SUITE("spectroscopy")
{
  TEST_CASE("grid covers both sidebands and hits the peaks")
  {
    const double w = angular_from_hz(60e3);
    const auto g = sideband_grid_hz(w, 60);
    CHECK(g.size() == 241);
    CHECK(g.front() == doctest::Approx(-120e3));
    CHECK(g.back() == doctest::Approx(120e3));
    CHECK(g[60] == doctest::Approx(-60e3));
    CHECK(g[120] == 0.0);
    CHECK(g[180] == doctest::Approx(60e3));
  }

  TEST_CASE("noiseless red/blue ratio equals nbar / (nbar + 1)")
  {
    for (double nbar : {0.05, 0.5, 1.0, 2.61, 5.33}) {
      const Spectrum s = spectrum_from_response(response_y(), thermal_distribution(nbar, kNMax, Axis::y));
      const double red = 1.0 - s.points[60].survival;
      const double blue = 1.0 - s.points[180].survival;
      CHECK(red / blue == doctest::Approx(nbar / (nbar + 1.0)).epsilon(0.01));
    }
  }

  TEST_CASE("noiseless round trip recovers nbar within 2 percent")
  {
    for (double nbar : {0.05, 0.1, 0.3, 0.7, 1.0, 2.0, 3.5, 5.0, 6.0}) {
      const Spectrum s = spectrum_from_response(response_y(), thermal_distribution(nbar, kNMax, Axis::y));
      const auto r = fit_spectrum(s, omega_y(), noiseless_options());
      CHECK(r.nbar.value == doctest::Approx(nbar).epsilon(0.02));
      CHECK(r.trap_frequency == doctest::Approx(omega_y()).epsilon(0.01));
    }
  }

  TEST_CASE("ground state spectrum has no red sideband")
  {
    const Spectrum s = spectrum_from_response(response_y(), Distribution::fock(0, kNMax, Axis::y));
    CHECK(1.0 - s.points[60].survival < 1e-3);
    CHECK(1.0 - s.points[180].survival > 0.5);
  }

  TEST_CASE("detection sampling is unbiased")
  {
    Spectrum s;
    s.axis = Axis::x;
    for (double p : {0.05, 0.3, 0.5, 0.8, 0.97})
      s.points.push_back({0.0, p, 0, 0});
    DetectionModel det;
    det.trials_per_point = 50;
    const int seeds = 10000;
    std::vector<double> mean(s.points.size(), 0.0);
    for (int k = 0; k < seeds; ++k) {
      const Spectrum sampled = simulate_detection(s, det, 1000 + k);
      for (std::size_t i = 0; i < mean.size(); ++i)
        mean[i] += sampled.points[i].survival / seeds;
    }
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double p = s.points[i].survival;
      const double sigma = std::sqrt(p * (1 - p) / det.trials_per_point);
      CHECK(std::abs(mean[i] - p) < 3.0 * sigma / std::sqrt(double(seeds)));
    }
  }

  TEST_CASE("detection infidelities enter the stay probability")
  {
    DetectionModel det;
    det.microwave_pi_fidelity = 0.95;
    det.blowaway_survival_F3 = 0.98;
    det.blowaway_survival_F4 = 0.01;
    // Lower state -> F=3 with the pi fidelity; the upper state stays in F=4.
    const double s = 0.7;
    const double expected = s * (0.95 * 0.98 + 0.05 * 0.01) + (1 - s) * 0.01;
    CHECK(det.stay_probability(s) == doctest::Approx(expected));
    det.microwave_pi_fidelity = 1.2;
    CHECK_THROWS_AS(det.validate(), DomainError);
  }

  TEST_CASE("bootstrap errors shrink as one over sqrt(trials)")
  {
    const Spectrum model = spectrum_from_response(response_y(), thermal_distribution(1.0, kNMax, Axis::y));
    FitOptions opt = noiseless_options();
    opt.bootstrap_resamples = 300;
    std::vector<double> widths;
    for (long trials : {100L, 400L, 1600L}) {
      DetectionModel det;
      det.trials_per_point = trials;
      double w = 0.0;
      const int repeats = 4;
      for (int k = 0; k < repeats; ++k) {
        opt.seed = 77 + k;
        const auto r = fit_spectrum(simulate_detection(model, det, 500 + k), omega_y(), opt);
        w += (r.nbar.err_plus + r.nbar.err_minus) / repeats;
      }
      widths.push_back(w);
    }
    CHECK(widths[0] / widths[1] == doctest::Approx(2.0).epsilon(0.25));
    CHECK(widths[1] / widths[2] == doctest::Approx(2.0).epsilon(0.25));
  }

  TEST_CASE("fit rejects unusable spectra")
  {
    Spectrum flat;
    flat.axis = Axis::y;
    for (double f : sideband_grid_hz(omega_y(), 60))
      flat.points.push_back({f, 1.0, 0, 0});
    CHECK_THROWS_AS(fit_spectrum(flat, omega_y(), noiseless_options()), FitError);

    Spectrum sparse;
    sparse.axis = Axis::y;
    for (double f : sideband_grid_hz(omega_y(), 4))
      sparse.points.push_back({f, 0.9, 0, 0});
    CHECK_THROWS_AS(fit_spectrum(sparse, omega_y(), noiseless_options()), FitError);
  }

  TEST_CASE("ratio at or above one gives only a lower bound")
  {
    CHECK(std::isinf(nbar_from_fitted_ratio(1.0)));
    CHECK(nbar_from_fitted_ratio(-0.1) == 0.0);
    CHECK(nbar_from_fitted_ratio(0.5) == doctest::Approx(1.0));
  }

  TEST_CASE("3D ground-state population")
  {
    CHECK(ground_population_3d({0.07, 0.04, 0.08}) == doctest::Approx(1.0 / (1.07 * 1.04 * 1.08)));
    std::array<ThermometryResult, 3> rs;
    for (int q = 0; q < 3; ++q) {
      rs[q].nbar.value = 0.1;
      rs[q].nbar_interval = {0.05, 0.2};
    }
    const auto rep = three_axis_report(rs);
    CHECK(rep.p3d == doctest::Approx(std::pow(1 / 1.1, 3)));
    CHECK(rep.p3d_low == doctest::Approx(std::pow(1 / 1.2, 3)));
    CHECK(rep.p3d_high == doctest::Approx(std::pow(1 / 1.05, 3)));
  }
}
