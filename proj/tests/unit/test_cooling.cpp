#include <doctest.h>

#include "rsc/config.hpp"
#include "rsc/cooling.hpp"

#include <cmath>
#include <random>

using namespace rsc;

namespace {

const ExperimentConfig& preset()
{
  static const ExperimentConfig cfg = resolve_config("paper-cs", nlohmann::json());
  return cfg;
}

// Gillespie walk: up-rate e2 (n+1), down-rate e2 n, no up-moves at n_max.
int gillespie_walk(int n, double e2, double duration, int n_max, std::mt19937_64& rng)
{
  std::exponential_distribution<double> wait(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double t = 0.0;
  for (;;) {
    const double up = n < n_max ? e2 * (n + 1) : 0.0;
    const double down = e2 * n;
    const double total = up + down;
    t += wait(rng) / total;
    if (t > duration)
      return n;
    n += u(rng) * total < up ? 1 : -1;
  }
}

} // namespace

TEST_SUITE("cooling")
{
  TEST_CASE("pump heating matrix is column stochastic")
  {
    for (double e2 : {0.01, 0.0296, 0.085}) {
      const Eigen::MatrixXd m = pump_heating_matrix(e2, 2.1, 60);
      CHECK((m.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
      CHECK(m.minCoeff() > -1e-15);
      CHECK(pump_heating_generator(e2, 60).colwise().sum().cwiseAbs().maxCoeff() < 1e-15);
    }
    CHECK(pump_heating_matrix(0.0, 2.1, 10).isIdentity());
  }

  TEST_CASE("pump heating matrix agrees with a Gillespie simulation")
  {
    const double e2 = 0.172 * 0.172 * 4.0 / 3.0;
    const double events = 2.1;
    const int n_max = 40;
    const int n0 = 2;
    const Eigen::MatrixXd m = pump_heating_matrix(e2, events, n_max);
    std::mt19937_64 rng(424242);
    const long samples = 1000000;
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(n_max + 1);
    double mean = 0.0;
    for (long k = 0; k < samples; ++k) {
      const int n = gillespie_walk(n0, e2, events, n_max, rng);
      hist[n] += 1.0;
      mean += n;
    }
    hist /= double(samples);
    mean /= double(samples);
    const Eigen::VectorXd col = m.col(n0);
    const double exact_mean = col.dot(Eigen::VectorXd::LinSpaced(n_max + 1, 0, n_max));
    CHECK(std::abs(mean / exact_mean - 1.0) < 0.01);
    for (int n = 0; n <= 6; ++n)
      CHECK(std::abs(hist[n] - col[n]) <
            std::max(0.01 * col[n], 5.0 * std::sqrt(col[n] * (1.0 - col[n]) / double(samples))));
    // Up minus down rate is e2 at every n, so each event adds e2 phonons on average.
    CHECK(exact_mean == doctest::Approx(n0 + e2 * events).epsilon(1e-9));
  }

  TEST_CASE("kick geometry")
  {
    OpticalPumpModel pump;
    CHECK(pump.heating_eta_squared(Axis::x) == doctest::Approx(0.172 * 0.172 * 4.0 / 3.0));
    CHECK(pump.heating_eta_squared(Axis::y) == doctest::Approx(0.186 * 0.186 / 3.0));
    CHECK(pump.heating_eta_squared(Axis::z) == doctest::Approx(0.253 * 0.253 / 3.0));
  }

  TEST_CASE("transfer tables respect the ladder ends")
  {
    const auto pulse = cooling_pulse(preset(), Axis::z);
    const TransferTable t = transfer_table(pulse, 0.0, 30);
    CHECK(t.red[0] == 0.0);
    CHECK(t.blue[30] == 0.0);
    for (int n = 0; n <= 30; ++n) {
      CHECK(t.red[n] >= 0.0);
      CHECK(t.red[n] <= 1.0 + 1e-12);
      CHECK(t.carrier[n] < 0.01); // far off resonance
    }
    CHECK(t.red[1] > 0.5);
  }

  TEST_CASE("Raman pulse conserves probability and removes phonons")
  {
    const auto pulse = cooling_pulse(preset(), Axis::y);
    const auto d = thermal_distribution(2.61, 60, Axis::y);
    const auto [out, moved] = apply_raman_pulse(d, pulse);
    CHECK(out.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.mean() < d.mean());
    CHECK(moved > 0.0);
    CHECK(moved < 1.0);
  }

  TEST_CASE("probability is conserved over 50 cycles")
  {
    const auto schedule = build_schedule(preset());
    const auto n_max = default_truncation(preset().initial_nbar);
    const CoolingEngine engine(schedule, preset().pump, std::nullopt, n_max);
    CoolingState state = CoolingState::thermal(preset().initial_nbar, n_max);
    for (int c = 0; c < 50; ++c) {
      engine.run_cycle(state);
      for (Axis a : all_axes) {
        CHECK(std::abs(state.distribution(a).total() - 1.0) < 1e-6);
        CHECK(state.axes[index(a)].ready.minCoeff() > -1e-12);
      }
    }
  }

  TEST_CASE("zero cycles echo the initial thermal state")
  {
    auto schedule = build_schedule(preset());
    schedule.n_cycles = 0;
    const Trajectory t = run_schedule(preset().initial_nbar, schedule, preset().pump, std::nullopt);
    REQUIRE(t.size() == 1);
    for (int q = 0; q < 3; ++q) {
      CHECK(t[0].nbar[q] == doctest::Approx(preset().initial_nbar[q]).epsilon(1e-6));
      CHECK(t[0].p0[q] == doctest::Approx(1.0 / (preset().initial_nbar[q] + 1.0)).epsilon(1e-9));
    }
  }

  TEST_CASE("cooling lowers every axis")
  {
    const Trajectory t = run_schedule(preset().initial_nbar, build_schedule(preset()), preset().pump, std::nullopt);
    REQUIRE(t.size() == 51);
    for (int q = 0; q < 3; ++q) {
      CHECK(t[10].nbar[q] < t[0].nbar[q]);
      CHECK(t[50].nbar[q] < t[10].nbar[q]);
      // Fast-then-slow: the first ten cycles remove more than the last ten.
      CHECK(t[0].nbar[q] - t[10].nbar[q] > t[40].nbar[q] - t[50].nbar[q]);
    }
    CHECK(t[50].p3d > t[0].p3d);
  }

  TEST_CASE("drift detuning scales by seven between schemes")
  {
    const auto& cs = preset().species;
    for (double b : {2.5e-8, 1e-7, 4e-7}) {
      const DriftModel single{make_zeeman_scheme(ZeemanLabel::SingleManifold, cs), 7.0 * b};
      const DriftModel inter{make_zeeman_scheme(ZeemanLabel::InterManifold, cs), b};
      CHECK(inter.detuning() == doctest::Approx(single.detuning()).epsilon(1e-15));
    }
  }

  TEST_CASE("drift scan pairs inter-manifold rows with single-manifold rows at seven times the field")
  {
    auto schedule = build_schedule(preset());
    schedule.n_cycles = 5;
    const auto grid = drift_grid_with_scaled_points({0.0, 1e-7});
    CHECK(grid.size() == 3);
    const auto rows = drift_robustness_scan(preset().initial_nbar, schedule, preset().pump, preset().species, grid);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].p3d == rows[3].p3d);
    for (const auto& r : rows)
      if (r.scaling_residual)
        CHECK(*r.scaling_residual < 1e-9);
  }

  TEST_CASE("Monte Carlo trajectories agree with the deterministic engine")
  {
    auto schedule = build_schedule(preset());
    schedule.n_cycles = 5;
    const Trajectory det = run_schedule(preset().initial_nbar, schedule, preset().pump, std::nullopt);
    const MonteCarloResult mc = monte_carlo_oracle(preset().initial_nbar, schedule, preset().pump, std::nullopt, 20000, 99);
    REQUIRE(mc.points.size() == det.size());
    for (int c : {1, 5})
      for (int q = 0; q < 3; ++q) {
        CHECK(std::abs(mc.points[c].nbar[q] - det[c].nbar[q]) < 4.0 * mc.points[c].nbar_se[q]);
        CHECK(std::abs(mc.points[c].p0[q] - det[c].p0[q]) < 4.0 * mc.points[c].p0_se[q]);
      }
  }

  TEST_CASE("steady state lies below the reachable trajectory")
  {
    const auto limit = steady_state_limit(build_schedule(preset()), preset().pump);
    for (double nb : limit.nbar) {
      CHECK(nb >= 0.0);
      CHECK(nb < 0.1);
    }
  }

  TEST_CASE("schedule layout")
  {
    const auto s = build_schedule(preset());
    CHECK(s.steps.size() == 3);
    CHECK(s.steps[0].pulse.axis == Axis::z);
    CHECK(s.steps[2].pulse.axis == Axis::x);
    CHECK(s.cycle_duration() == doctest::Approx(1e-3));
  }
}
