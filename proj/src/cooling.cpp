#include "rsc/cooling.hpp"
#include "rsc/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <string>

namespace rsc {

double CoolingSchedule::cycle_duration() const
{
  double total = idle_tail;
  for (const auto& s : steps)
    total += s.pump_duration + s.pulse_slot;
  return total;
}

void CoolingSchedule::validate() const
{
  if (n_cycles < 0)
    throw DomainError("schedule n_cycles must be non-negative");
  if (idle_tail < 0)
    throw DomainError("schedule idle tail must be non-negative");
  for (const auto& s : steps) {
    if (s.pump_duration < 0 || s.pulse_slot < 0)
      throw DomainError("pump duration and pulse slot must be non-negative");
    s.pulse.validate();
  }
}

void OpticalPumpModel::validate() const
{
  if (!(mean_scatter_events > 0))
    throw DomainError("mean_scatter_events must be positive");
  for (Axis a : all_axes)
    if (eta_op[a] < 0 || !(eta_op[a] < 1))
      throw DomainError("pump Lamb-Dicke parameter on " + std::string(to_string(a)) + " must lie in [0, 1)");
  if (efficiency < 0 || efficiency > 1)
    throw DomainError("pump efficiency must lie in [0, 1]");
}

double OpticalPumpModel::heating_eta_squared(Axis axis) const
{
  const double eta = eta_op[axis];
  return eta * eta * ((axis == absorption_axis ? 1.0 : 0.0) + 1.0 / 3.0);
}

TransferTable transfer_table(const RamanPulse<double>& pulse, double extra_detuning, int n_max)
{
  pulse.validate();
  if (n_max < 1)
    throw DomainError("transfer table needs n_max >= 1");
  const double red_detuning = pulse.detuning + extra_detuning;
  const double carrier_detuning = carrier_channel_detuning(red_detuning, pulse.trap_frequency);
  const double blue_detuning = blue_channel_detuning(red_detuning, pulse.trap_frequency);
  const double peak = std::abs(pulse.envelope.peak_rabi);

  TransferTable t{Eigen::VectorXd::Zero(n_max + 1), Eigen::VectorXd::Zero(n_max + 1),
                  Eigen::VectorXd::Zero(n_max + 1)};
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0)
      t.red[n] = transfer_probability(Envelope<double>{pulse.envelope.shape, sideband_rabi(peak, pulse.eta, n, -1),
                                                       pulse.envelope.tau, pulse.envelope.window},
                                      red_detuning);
    t.carrier[n] = transfer_probability(Envelope<double>{pulse.envelope.shape,
                                                         std::abs(sideband_rabi(peak, pulse.eta, n, 0)),
                                                         pulse.envelope.tau, pulse.envelope.window},
                                        carrier_detuning);
    // The top bin is reflecting: no blue transfer out of the truncated space.
    if (n < n_max)
      t.blue[n] = transfer_probability(Envelope<double>{pulse.envelope.shape, sideband_rabi(peak, pulse.eta, n, 1),
                                                        pulse.envelope.tau, pulse.envelope.window},
                                       blue_detuning);
  }
  return t;
}

Eigen::MatrixXd pump_heating_generator(double eta_squared, int n_max)
{
  if (eta_squared < 0)
    throw DomainError("heating rate must be non-negative");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double up = n < n_max ? eta_squared * (n + 1) : 0.0;
    const double down = eta_squared * n;
    g(n, n) = -(up + down);
    if (n < n_max)
      g(n + 1, n) = up;
    if (n > 0)
      g(n - 1, n) = down;
  }
  return g;
}

Eigen::MatrixXd pump_heating_matrix(double eta_squared, double mean_events, int n_max)
{
  if (mean_events < 0)
    throw DomainError("mean scattering events must be non-negative");
  if (eta_squared == 0.0 || mean_events == 0.0)
    return Eigen::MatrixXd::Identity(n_max + 1, n_max + 1);
  const Eigen::MatrixXd g = pump_heating_generator(eta_squared, n_max) * mean_events;
  return g.exp();
}

namespace {

// Moves `ready` mass out through the three channels; returns the transferred
// population per final phonon number.
Eigen::VectorXd transfer_out(Eigen::VectorXd& ready, const TransferTable& t)
{
  const int n_max = t.n_max();
  Eigen::VectorXd moved = Eigen::VectorXd::Zero(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double pr = t.red[n], pc = t.carrier[n], pb = t.blue[n];
    const double sum = pr + pc + pb;
    if (sum <= 0.0 || ready[n] == 0.0)
      continue;
    const double stay = (1.0 - pr) * (1.0 - pc) * (1.0 - pb);
    const double out = ready[n] * (1.0 - stay);
    ready[n] -= out;
    if (n > 0)
      moved[n - 1] += out * pr / sum;
    moved[n] += out * pc / sum;
    if (n < n_max)
      moved[n + 1] += out * pb / sum;
  }
  return moved;
}

void check_axis_size(const Eigen::VectorXd& v, int n_max)
{
  if (v.size() != n_max + 1)
    throw DomainError("distribution truncation does not match the engine");
}

} // namespace

std::pair<Distribution, double> apply_raman_pulse(const Distribution& dist, const RamanPulse<double>& pulse,
                                                  const std::optional<DriftModel>& drift)
{
  if (dist.axis != pulse.axis)
    throw DomainError("Raman pulse addresses axis " + std::string(to_string(pulse.axis)) +
                      " but the distribution belongs to axis " + std::string(to_string(dist.axis)));
  const TransferTable t = transfer_table(pulse, drift ? drift->detuning() : 0.0, dist.n_max());
  Eigen::VectorXd ready = dist.probs;
  const Eigen::VectorXd moved = transfer_out(ready, t);
  return {Distribution{ready + moved, dist.axis}, moved.sum()};
}

Distribution apply_optical_pumping(const Distribution& dist, const OpticalPumpModel& pump, Axis axis)
{
  pump.validate();
  const Eigen::MatrixXd m = pump_heating_matrix(pump.heating_eta_squared(axis), pump.mean_scatter_events, dist.n_max());
  return Distribution{m * dist.probs, dist.axis};
}

CoolingState CoolingState::thermal(const AxisArray& nbars, const std::array<int, 3>& n_max)
{
  CoolingState s;
  for (Axis a : all_axes) {
    const auto i = index(a);
    s.axes[i].ready = thermal_distribution(nbars[i], n_max[i], a).probs;
    s.axes[i].shelved = Eigen::VectorXd::Zero(n_max[i] + 1);
  }
  return s;
}

AxisArray CoolingState::nbars() const
{
  AxisArray out{};
  for (Axis a : all_axes)
    out[index(a)] = distribution(a).mean();
  return out;
}

AxisArray CoolingState::ground_populations() const
{
  AxisArray out{};
  for (Axis a : all_axes)
    out[index(a)] = distribution(a).ground_population();
  return out;
}

double CoolingState::ground_population_3d() const
{
  const AxisArray p = ground_populations();
  return p[0] * p[1] * p[2];
}

double CoolingState::shelved_fraction() const { return axes[0].shelved.sum(); }

TrajectoryPoint summarize(int cycle, const CoolingState& state)
{
  TrajectoryPoint p;
  p.cycle = cycle;
  p.nbar = state.nbars();
  p.p0 = state.ground_populations();
  p.p3d = p.p0[0] * p.p0[1] * p.p0[2];
  return p;
}

CoolingEngine::CoolingEngine(CoolingSchedule schedule, OpticalPumpModel pump, std::optional<DriftModel> drift,
                             std::array<int, 3> n_max)
    : schedule_(std::move(schedule)), pump_(std::move(pump)), drift_(std::move(drift)), n_max_(n_max)
{
  schedule_.validate();
  pump_.validate();
  for (int n : n_max_)
    if (n < 1)
      throw DomainError("engine truncation must be at least 1");
  const double extra = drift_ ? drift_->detuning() : 0.0;
  tables_.resize(schedule_.steps.size());
  for (std::size_t i = 0; i < schedule_.steps.size(); ++i) {
    const auto& pulse = schedule_.steps[i].pulse;
    tables_[i] = transfer_table(pulse, extra, n_max_[index(pulse.axis)]);
  }
  for (Axis a : all_axes)
    heating_[index(a)] = pump_heating_matrix(pump_.heating_eta_squared(a), pump_.mean_scatter_events, n_max_[index(a)]);
}

void CoolingEngine::pump_stage(CoolingState& state, Axis axis) const
{
  if (pump_.reset_internal_state) {
    for (auto& s : state.axes) {
      s.ready += pump_.efficiency * s.shelved;
      s.shelved *= 1.0 - pump_.efficiency;
    }
  }
  auto heat = [&](Axis a) {
    auto& s = state.axes[index(a)];
    check_axis_size(s.ready, n_max_[index(a)]);
    s.ready = heating_[index(a)] * s.ready;
    s.shelved = heating_[index(a)] * s.shelved;
  };
  if (pump_.heat_all_axes)
    for (Axis a : all_axes)
      heat(a);
  else
    heat(axis);
}

double CoolingEngine::raman_stage(CoolingState& state, std::size_t step) const
{
  const Axis axis = schedule_.steps.at(step).pulse.axis;
  auto& target = state.axes[index(axis)];
  check_axis_size(target.ready, n_max_[index(axis)]);
  const Eigen::VectorXd moved = transfer_out(target.ready, tables_[step]);
  target.shelved += moved;
  const double transferred = moved.sum();

  // The other axes share the internal state; their shelved share grows in
  // proportion to their ready distribution.
  for (Axis a : all_axes) {
    if (a == axis)
      continue;
    auto& s = state.axes[index(a)];
    const double ready = s.ready.sum();
    if (ready <= 0.0)
      continue;
    const double fraction = std::min(1.0, transferred / ready);
    s.shelved += fraction * s.ready;
    s.ready *= 1.0 - fraction;
  }
  return transferred;
}

void CoolingEngine::run_cycle(CoolingState& state) const
{
  for (std::size_t i = 0; i < schedule_.steps.size(); ++i) {
    if (schedule_.steps[i].pump_enabled)
      pump_stage(state, schedule_.steps[i].pulse.axis);
    raman_stage(state, i);
  }
}

Trajectory CoolingEngine::run(CoolingState state, int n_cycles) const
{
  if (n_cycles < 0)
    throw DomainError("cycle count must be non-negative");
  Trajectory out;
  out.reserve(n_cycles + 1);
  out.push_back(summarize(0, state));
  for (int c = 1; c <= n_cycles; ++c) {
    run_cycle(state);
    out.push_back(summarize(c, state));
  }
  return out;
}

std::array<int, 3> default_truncation(const AxisArray& nbars)
{
  return {default_n_max(nbars[0]), default_n_max(nbars[1]), default_n_max(nbars[2])};
}

std::array<Distribution, 3> run_cycle(const std::array<Distribution, 3>& dists, const CoolingSchedule& schedule,
                                      const OpticalPumpModel& pump, const std::optional<DriftModel>& drift)
{
  CoolingState state;
  std::array<int, 3> n_max{};
  for (Axis a : all_axes) {
    const auto& d = dists[index(a)];
    if (d.axis != a)
      throw DomainError("run_cycle expects distributions ordered x, y, z");
    n_max[index(a)] = d.n_max();
    state.axes[index(a)] = {d.probs, Eigen::VectorXd::Zero(d.probs.size())};
  }
  CoolingEngine(schedule, pump, drift, n_max).run_cycle(state);
  return {state.distribution(Axis::x), state.distribution(Axis::y), state.distribution(Axis::z)};
}

Trajectory run_schedule(const AxisArray& initial_nbars, const CoolingSchedule& schedule,
                        const OpticalPumpModel& pump, const std::optional<DriftModel>& drift)
{
  const auto n_max = default_truncation(initial_nbars);
  const CoolingEngine engine(schedule, pump, drift, n_max);
  return engine.run(CoolingState::thermal(initial_nbars, n_max), schedule.n_cycles);
}

SteadyStateResult steady_state_limit(const CoolingSchedule& schedule, const OpticalPumpModel& pump,
                                     const std::optional<DriftModel>& drift, double tolerance, int max_cycles)
{
  const AxisArray start{0.5, 0.5, 0.5};
  const auto n_max = default_truncation(start);
  const CoolingEngine engine(schedule, pump, drift, n_max);
  CoolingState state = CoolingState::thermal(start, n_max);
  AxisArray previous = state.nbars();
  for (int c = 1; c <= max_cycles; ++c) {
    engine.run_cycle(state);
    const AxisArray now = state.nbars();
    bool settled = true;
    for (int i = 0; i < 3; ++i)
      settled = settled && std::abs(now[i] - previous[i]) < tolerance;
    previous = now;
    if (settled)
      return {now, c};
  }
  throw NumericalError("steady state not reached within " + std::to_string(max_cycles) + " cycles");
}

std::vector<double> drift_grid_with_scaled_points(const std::vector<double>& base)
{
  std::vector<double> grid;
  for (double b : base) {
    if (!std::isfinite(b))
      throw DomainError("drift grid values must be finite");
    grid.push_back(b);
    grid.push_back(7.0 * b);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<DriftScanRow> drift_robustness_scan(const AxisArray& initial_nbars, const CoolingSchedule& schedule,
                                                const OpticalPumpModel& pump, const AtomSpecies<double>& species,
                                                const std::vector<double>& delta_B_grid)
{
  for (double b : delta_B_grid)
    if (!std::isfinite(b))
      throw DomainError("drift grid values must be finite");
  const std::array<ZeemanLabel, 2> schemes{ZeemanLabel::SingleManifold, ZeemanLabel::InterManifold};
  const std::size_t n = delta_B_grid.size();
  std::vector<DriftScanRow> rows(2 * n);
  parallel_for(rows.size(), [&](std::size_t k) {
    const ZeemanLabel label = schemes[k / n];
    const double b = delta_B_grid[k % n];
    const DriftModel drift{make_zeeman_scheme(label, species), b};
    const Trajectory t = run_schedule(initial_nbars, schedule, pump, drift);
    rows[k] = {b, label, t.back().p3d, std::nullopt};
  });

  // Inter-manifold rows at B pair with single-manifold rows at 7 B.
  for (std::size_t i = 0; i < n; ++i) {
    const double target = 7.0 * delta_B_grid[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double b = delta_B_grid[j];
      if (std::abs(b - target) <= 1e-12 * std::max(std::abs(target), 1e-300) || (b == 0.0 && target == 0.0)) {
        rows[n + i].scaling_residual = std::abs(rows[n + i].p3d - rows[j].p3d);
        break;
      }
    }
  }
  return rows;
}

} // namespace rsc
