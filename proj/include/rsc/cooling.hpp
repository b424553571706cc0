#pragma once

#include "rsc/axis.hpp"
#include "rsc/lamb_dicke.hpp"
#include "rsc/pulse.hpp"
#include "rsc/species.hpp"
#include "rsc/thermal.hpp"
#include "rsc/zeeman.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace rsc {

using Distribution = PhononDistribution<double>;
using AxisArray = std::array<double, 3>;

/// One pump + Raman pair inside a cooling cycle.
struct CycleStep {
  double pump_duration = 200e-6; // s
  double pulse_slot = 100e-6;    // s, time reserved for the pulse in the cycle layout
  bool pump_enabled = true;
  RamanPulse<double> pulse;
};

struct CoolingSchedule {
  std::vector<CycleStep> steps; // executed in order every cycle
  double idle_tail = 100e-6;    // s
  int n_cycles = 50;

  double cycle_duration() const;
  void validate() const;
};

struct OpticalPumpModel {
  double mean_scatter_events = 2.1;
  LambDickeSet<double> eta_op = reference_pump_lamb_dicke<double>;
  double efficiency = 1.0;        // fraction of shelved population returned per pump
  Axis absorption_axis = Axis::x; // pump beam direction
  bool reset_internal_state = true;
  bool heat_all_axes = false;     // false: each pump stage heats only the axis cooled next

  void validate() const;
  /// Per-event mean-square kick on `axis` in units of the ground-state spread:
  /// eta^2 (1 + 1/3) along the absorption axis, eta^2 / 3 otherwise.
  double heating_eta_squared(Axis axis) const;
};

/// Quasi-static field offset seen by every Raman pulse.
struct DriftModel {
  ZeemanScheme<double> scheme;
  double delta_B = 0.0; // T

  double detuning() const { return zeeman_drift_detuning(scheme, delta_B); }
};

/// Two-level transfer probabilities for each initial phonon number.
struct TransferTable {
  Eigen::VectorXd red, carrier, blue;
  int n_max() const { return static_cast<int>(red.size()) - 1; }
};

/// Detuning (rad/s) of each channel seen from a pulse whose red-sideband
/// detuning is `red_detuning`.
inline double carrier_channel_detuning(double red_detuning, double trap_frequency)
{
  return red_detuning + trap_frequency;
}
inline double blue_channel_detuning(double red_detuning, double trap_frequency)
{
  return red_detuning + 2.0 * trap_frequency;
}

/// Transfer table of `pulse` with an additional detuning offset (rad/s).
TransferTable transfer_table(const RamanPulse<double>& pulse, double extra_detuning, int n_max);

/// Generator of the pump random walk: up-rate eta^2 (n+1), down-rate eta^2 n,
/// reflecting at n_max. Columns sum to zero.
Eigen::MatrixXd pump_heating_generator(double eta_squared, int n_max);

/// exp(events * generator): Poisson-many scattering events with the given mean.
Eigen::MatrixXd pump_heating_matrix(double eta_squared, double mean_events, int n_max);

/// Applies a Raman pulse to a distribution that is entirely in the lower
/// internal state. Returns the new distribution and the transferred mass.
std::pair<Distribution, double> apply_raman_pulse(const Distribution& dist, const RamanPulse<double>& pulse,
                                                  const std::optional<DriftModel>& drift = std::nullopt);

/// Phonon random walk caused by one optical pumping stage on `axis`.
Distribution apply_optical_pumping(const Distribution& dist, const OpticalPumpModel& pump, Axis axis);

/// Phonon state of one axis split by internal state: `ready` is in the state the
/// Raman pulse addresses, `shelved` has already been transferred.
struct AxisState {
  Eigen::VectorXd ready;
  Eigen::VectorXd shelved;

  Distribution distribution(Axis axis) const { return {ready + shelved, axis}; }
};

struct CoolingState {
  std::array<AxisState, 3> axes;

  static CoolingState thermal(const AxisArray& nbars, const std::array<int, 3>& n_max);
  Distribution distribution(Axis axis) const { return axes[index(axis)].distribution(axis); }
  AxisArray nbars() const;
  AxisArray ground_populations() const;
  double ground_population_3d() const;
  double shelved_fraction() const;
};

struct TrajectoryPoint {
  int cycle = 0;
  AxisArray nbar{};
  AxisArray p0{};
  double p3d = 0.0;
};

using Trajectory = std::vector<TrajectoryPoint>;

TrajectoryPoint summarize(int cycle, const CoolingState& state);

/// Deterministic propagation engine. Transfer tables and pump maps are built once
/// per (schedule step, truncation) and reused across cycles.
class CoolingEngine {
public:
  CoolingEngine(CoolingSchedule schedule, OpticalPumpModel pump, std::optional<DriftModel> drift,
                std::array<int, 3> n_max);

  const CoolingSchedule& schedule() const { return schedule_; }
  const OpticalPumpModel& pump() const { return pump_; }
  const std::array<int, 3>& n_max() const { return n_max_; }
  const TransferTable& table(std::size_t step) const { return tables_[step]; }
  const Eigen::MatrixXd& heating(Axis axis) const { return heating_[index(axis)]; }

  void pump_stage(CoolingState& state, Axis axis) const;
  double raman_stage(CoolingState& state, std::size_t step) const;
  void run_cycle(CoolingState& state) const;
  Trajectory run(CoolingState state, int n_cycles) const;

private:
  CoolingSchedule schedule_;
  OpticalPumpModel pump_;
  std::optional<DriftModel> drift_;
  std::array<int, 3> n_max_;
  std::vector<TransferTable> tables_;
  std::array<Eigen::MatrixXd, 3> heating_;
};

/// Truncation per axis for thermal starting values.
std::array<int, 3> default_truncation(const AxisArray& nbars);

/// One cycle on a three-axis state (all axes start in the lower internal state).
std::array<Distribution, 3> run_cycle(const std::array<Distribution, 3>& dists, const CoolingSchedule& schedule,
                                      const OpticalPumpModel& pump, const std::optional<DriftModel>& drift);

/// Per-cycle record from thermal initial values, entries 0..n_cycles.
Trajectory run_schedule(const AxisArray& initial_nbars, const CoolingSchedule& schedule,
                        const OpticalPumpModel& pump, const std::optional<DriftModel>& drift);

struct SteadyStateResult {
  AxisArray nbar{};
  int cycles = 0;
};

/// Fixed point of the cycle map starting from nbar = 0.5 on every axis; stops
/// once every axis changes by less than `tolerance` in one cycle.
SteadyStateResult steady_state_limit(const CoolingSchedule& schedule, const OpticalPumpModel& pump,
                                     const std::optional<DriftModel>& drift = std::nullopt,
                                     double tolerance = 1e-5, int max_cycles = 10000);

struct DriftScanRow {
  double delta_B = 0.0;
  ZeemanLabel scheme = ZeemanLabel::SingleManifold;
  double p3d = 0.0;
  std::optional<double> scaling_residual; // |P_inter(B) - P_single(7B)| when 7B is on the grid
};

/// Grid {b} union {7 b}, sorted, duplicates removed.
std::vector<double> drift_grid_with_scaled_points(const std::vector<double>& base);

/// Final 3D ground-state population for both schemes at every grid field.
std::vector<DriftScanRow> drift_robustness_scan(const AxisArray& initial_nbars, const CoolingSchedule& schedule,
                                                const OpticalPumpModel& pump, const AtomSpecies<double>& species,
                                                const std::vector<double>& delta_B_grid);

struct MonteCarloPoint {
  int cycle = 0;
  AxisArray nbar{}, nbar_se{};
  AxisArray p0{}, p0_se{};
  double p3d = 0.0, p3d_se = 0.0;
};

struct MonteCarloResult {
  std::vector<MonteCarloPoint> points; // cycles 0..n_cycles
  long trials = 0;
  std::uint64_t seed = 0;
};

/// Single-atom trajectories: thermal draws of n, Bernoulli pulse outcomes with a
/// categorical channel choice, and Gillespie-sampled pump kicks.
MonteCarloResult monte_carlo_oracle(const AxisArray& initial_nbars, const CoolingSchedule& schedule,
                                    const OpticalPumpModel& pump, const std::optional<DriftModel>& drift,
                                    long trials, std::uint64_t seed);

} // namespace rsc
