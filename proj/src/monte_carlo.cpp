#include "rsc/cooling.hpp"
#include "rsc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rsc {

namespace {

struct Tally {
  // Integer accumulators keep the reduction independent of chunking.
  std::vector<std::array<long long, 3>> sum_n, sum_n2, ground;
  std::vector<long long> ground_3d;

  explicit Tally(std::size_t points)
      : sum_n(points, {0, 0, 0}), sum_n2(points, {0, 0, 0}), ground(points, {0, 0, 0}), ground_3d(points, 0)
  {
  }

  void record(std::size_t point, const std::array<int, 3>& n)
  {
    for (int q = 0; q < 3; ++q) {
      sum_n[point][q] += n[q];
      sum_n2[point][q] += static_cast<long long>(n[q]) * n[q];
      ground[point][q] += n[q] == 0;
    }
    ground_3d[point] += n[0] == 0 && n[1] == 0 && n[2] == 0;
  }

  void merge(const Tally& other)
  {
    for (std::size_t i = 0; i < sum_n.size(); ++i) {
      for (int q = 0; q < 3; ++q) {
        sum_n[i][q] += other.sum_n[i][q];
        sum_n2[i][q] += other.sum_n2[i][q];
        ground[i][q] += other.ground[i][q];
      }
      ground_3d[i] += other.ground_3d[i];
    }
  }
};

// Birth-death walk over a fixed "time" equal to the mean number of scattering events.
int gillespie_heating(int n, int n_max, double eta_squared, double duration, std::mt19937_64& rng)
{
  if (eta_squared <= 0.0)
    return n;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double remaining = duration;
  for (;;) {
    const double up = n < n_max ? eta_squared * (n + 1) : 0.0;
    const double down = eta_squared * n;
    const double total = up + down;
    if (total <= 0.0)
      return n;
    const double wait = -std::log1p(-uniform(rng)) / total;
    if (wait > remaining)
      return n;
    remaining -= wait;
    n += uniform(rng) * total < up ? 1 : -1;
  }
}

int sample_thermal(double nbar, int n_max, std::mt19937_64& rng)
{
  if (nbar <= 0.0)
    return 0;
  std::geometric_distribution<int> geometric(1.0 / (1.0 + nbar));
  return std::min(geometric(rng), n_max);
}

} // namespace

MonteCarloResult monte_carlo_oracle(const AxisArray& initial_nbars, const CoolingSchedule& schedule,
                                    const OpticalPumpModel& pump, const std::optional<DriftModel>& drift,
                                    long trials, std::uint64_t seed)
{
  if (trials < 1)
    throw DomainError("Monte Carlo needs at least one trial");
  const auto n_max = default_truncation(initial_nbars);
  const CoolingEngine engine(schedule, pump, drift, n_max);
  const auto& steps = engine.schedule().steps;
  const std::size_t points = static_cast<std::size_t>(schedule.n_cycles) + 1;
  AxisArray heating{};
  for (Axis a : all_axes)
    heating[index(a)] = pump.heating_eta_squared(a);

  // Fixed chunking so the work split never depends on the worker count.
  const std::size_t chunks = std::min<std::size_t>(256, static_cast<std::size_t>(trials));
  std::vector<Tally> tallies(chunks, Tally(points));
  parallel_for(chunks, [&](std::size_t c) {
    Tally& tally = tallies[c];
    const long begin = static_cast<long>(trials * c / chunks);
    const long end = static_cast<long>(trials * (c + 1) / chunks);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (long t = begin; t < end; ++t) {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
      std::array<int, 3> n{};
      for (int q = 0; q < 3; ++q)
        n[q] = sample_thermal(initial_nbars[q], n_max[q], rng);
      bool shelved = false;
      tally.record(0, n);
      for (std::size_t cycle = 1; cycle < points; ++cycle) {
        for (std::size_t s = 0; s < steps.size(); ++s) {
          const int q = static_cast<int>(index(steps[s].pulse.axis));
          if (steps[s].pump_enabled) {
            if (pump.reset_internal_state && shelved && uniform(rng) < pump.efficiency)
              shelved = false;
            if (pump.heat_all_axes) {
              for (int a = 0; a < 3; ++a)
                n[a] = gillespie_heating(n[a], n_max[a], heating[a], pump.mean_scatter_events, rng);
            } else {
              n[q] = gillespie_heating(n[q], n_max[q], heating[q], pump.mean_scatter_events, rng);
            }
          }
          if (shelved)
            continue;
          const TransferTable& table = engine.table(s);
          const double pr = table.red[n[q]], pc = table.carrier[n[q]], pb = table.blue[n[q]];
          const double moved = 1.0 - (1.0 - pr) * (1.0 - pc) * (1.0 - pb);
          if (uniform(rng) >= moved)
            continue;
          shelved = true;
          const double pick = uniform(rng) * (pr + pc + pb);
          if (pick < pr)
            n[q] -= 1;
          else if (pick >= pr + pc)
            n[q] += 1;
        }
        tally.record(cycle, n);
      }
    }
  });
  for (std::size_t c = 1; c < chunks; ++c)
    tallies[0].merge(tallies[c]);
  const Tally& total = tallies[0];

  MonteCarloResult result;
  result.trials = trials;
  result.seed = seed;
  const double count = static_cast<double>(trials);
  for (std::size_t i = 0; i < points; ++i) {
    MonteCarloPoint p;
    p.cycle = static_cast<int>(i);
    for (int q = 0; q < 3; ++q) {
      const double mean = total.sum_n[i][q] / count;
      const double second = total.sum_n2[i][q] / count;
      const double variance = trials > 1 ? std::max(0.0, (second - mean * mean) * count / (count - 1.0)) : 0.0;
      p.nbar[q] = mean;
      p.nbar_se[q] = std::sqrt(variance / count);
      p.p0[q] = total.ground[i][q] / count;
      p.p0_se[q] = std::sqrt(p.p0[q] * (1.0 - p.p0[q]) / count);
    }
    p.p3d = total.ground_3d[i] / count;
    p.p3d_se = std::sqrt(p.p3d * (1.0 - p.p3d) / count);
    result.points.push_back(p);
  }
  return result;
}

} // namespace rsc
