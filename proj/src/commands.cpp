#include "rsc/commands.hpp"

#include "rsc/parallel.hpp"

#include <cmath>

namespace rsc {

using nlohmann::ordered_json;

namespace {

ordered_json per_axis(const AxisArray& v, double scale = 1.0)
{
  ordered_json j;
  for (Axis a : all_axes)
    j[std::string(to_string(a))] = v[index(a)] * scale;
  return j;
}

ordered_json per_axis(const LambDickeSet<double>& eta)
{
  return per_axis(AxisArray{eta.eta_x, eta.eta_y, eta.eta_z});
}

ordered_json finite_or_null(double v)
{
  if (std::isfinite(v))
    return v;
  return nullptr;
}

AxisArray to_axis_array(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

} // namespace

TrapReport compute_trap_report(const ExperimentConfig& cfg)
{
  const auto& model = cfg.trap.model;
  TrapModel<double> rodt_only = model;
  rodt_only.lattice.reset();
  const double mass = cfg.species.mass;

  TrapReport r;
  r.depth = trap_depth(model);
  r.rodt_depth = trap_depth(rodt_only);
  r.frequencies = to_axis_array(trap_frequencies(model));
  r.rodt_frequencies = to_axis_array(trap_frequencies(rodt_only));
  r.analytic_radial_x = gaussian_radial_frequency(r.rodt_depth, mass, model.rodt.waist_x);
  r.analytic_radial_y = gaussian_radial_frequency(r.rodt_depth, mass, model.rodt.waist_y);
  r.analytic_rodt_axial = gaussian_axial_frequency(r.rodt_depth, mass, model.rodt);
  if (model.lattice)
    r.lattice_constant = model.lattice->period();

  RamanGeometry<double> g;
  g.wavelength = raman_wavelength(cfg);
  r.raman_geometry_eta = raman_lamb_dicke_from_geometry(
      g, mass, Eigen::Vector3d(r.frequencies[0], r.frequencies[1], r.frequencies[2]));
  r.raman_eta = raman_lamb_dicke(cfg);
  r.pump_eta = cfg.pump.eta_op;
  return r;
}

ordered_json trap_report_json(const TrapReport& r)
{
  const double to_khz = 1.0 / (2.0 * constants::pi * 1e3);
  ordered_json j;
  j["depth_J"] = r.depth;
  j["depth_mK"] = millikelvin_from_joule(r.depth);
  j["rodt_depth_mK"] = millikelvin_from_joule(r.rodt_depth);
  j["trap_frequencies_kHz"] = per_axis(r.frequencies, to_khz);
  j["rodt_trap_frequencies_kHz"] = per_axis(r.rodt_frequencies, to_khz);
  j["analytic_kHz"] = {{"radial_x", r.analytic_radial_x * to_khz},
                       {"radial_y", r.analytic_radial_y * to_khz},
                       {"rodt_axial", r.analytic_rodt_axial * to_khz}};
  j["lattice_constant_um"] = r.lattice_constant ? ordered_json(*r.lattice_constant * 1e6) : ordered_json(nullptr);
  j["lamb_dicke"] = {{"raman_geometry", per_axis(r.raman_geometry_eta)},
                     {"raman_in_use", per_axis(r.raman_eta)},
                     {"optical_pumping", per_axis(r.pump_eta)}};
  return j;
}

void cmd_trap(const ExperimentConfig& cfg, OutputBundle& bundle)
{
  const TrapReport report = compute_trap_report(cfg);
  bundle.add("trap_report.json", trap_report_json(report).dump(2) + "\n");
  const Eigen::Vector3d origin = cfg.trap.model.rodt.focus;
  bundle.add("potential_cut_x.csv", potential_cut_csv(potential_cut(cfg.trap.model, origin, Eigen::Vector3d::UnitX().eval(),
                                                                    cfg.trap.cut_half_span, cfg.trap.cut_points)));
  bundle.add("potential_cut_z.csv", potential_cut_csv(potential_cut(cfg.trap.model, origin, Eigen::Vector3d::UnitZ().eval(),
                                                                    cfg.trap.cut_half_span, cfg.trap.cut_points)));
}

void cmd_cool(const ExperimentConfig& cfg, bool oracle, OutputBundle& bundle)
{
  const CoolingSchedule schedule = build_schedule(cfg);
  const auto drift = drift_model(cfg);
  const Trajectory trajectory = run_schedule(cfg.initial_nbar, schedule, cfg.pump, drift);
  std::optional<MonteCarloResult> mc;
  if (oracle)
    mc = monte_carlo_oracle(cfg.initial_nbar, schedule, cfg.pump, drift, cfg.monte_carlo_trials,
                            derive_seed(cfg.seed, 0x6d63));
  const MonteCarloResult* mc_ptr = mc ? &*mc : nullptr;
  bundle.add("trajectory.csv", trajectory_csv(trajectory, cfg.schedule.record_cycles, mc_ptr));
  bundle.add("trajectory_full.csv", trajectory_csv(trajectory, {}, mc_ptr));

  ordered_json report;
  const auto& last = trajectory.back();
  report["cycles"] = schedule.n_cycles;
  report["cycle_duration_s"] = schedule.cycle_duration();
  report["final_nbar"] = per_axis(last.nbar);
  report["final_P0"] = per_axis(last.p0);
  report["final_P_3D"] = last.p3d;
  try {
    const SteadyStateResult limit = steady_state_limit(schedule, cfg.pump, drift);
    report["steady_state_nbar"] = per_axis(limit.nbar);
    report["steady_state_cycles"] = limit.cycles;
  } catch (const NumericalError& e) {
    report["steady_state_nbar"] = nullptr;
    report["steady_state_error"] = e.what();
  }
  if (mc) {
    report["monte_carlo_trials"] = mc->trials;
    report["monte_carlo_seed"] = mc->seed;
  }
  bundle.add("cool_report.json", report.dump(2) + "\n");
}

std::string_view to_string(SpectrumStage stage) { return stage == SpectrumStage::Before ? "before" : "after"; }

std::array<Distribution, 3> stage_distributions(const ExperimentConfig& cfg, SpectrumStage stage)
{
  const auto n_max = default_truncation(cfg.initial_nbar);
  CoolingState state = CoolingState::thermal(cfg.initial_nbar, n_max);
  if (stage == SpectrumStage::After) {
    const CoolingEngine engine(build_schedule(cfg), cfg.pump, drift_model(cfg), n_max);
    for (int c = 0; c < cfg.schedule.n_cycles; ++c)
      engine.run_cycle(state);
  }
  return {state.distribution(Axis::x), state.distribution(Axis::y), state.distribution(Axis::z)};
}

void cmd_spectrum(const ExperimentConfig& cfg, SpectrumStage stage, OutputBundle& bundle)
{
  cfg.detection.validate();
  const auto dists = stage_distributions(cfg, stage);
  const std::string tag(to_string(stage));
  ordered_json report;
  report["stage"] = tag;
  report["convention"] = "survival = probability the atom is left in |F=4, mF=4>; transferred = 1 - survival";
  report["trials_per_point"] = cfg.detection.trials_per_point;
  for (Axis a : all_axes) {
    const auto q = index(a);
    const RamanPulse<double> probe = cooling_pulse(cfg, a);
    const auto grid = sideband_grid_hz(probe.trap_frequency, cfg.spectrum.points_per_trap_frequency);
    const Spectrum model = scan_sideband_spectrum(dists[q], probe, grid);
    const std::uint64_t seed = derive_seed(cfg.seed, (stage == SpectrumStage::Before ? 0x100 : 0x200) + q);
    Spectrum sampled = simulate_detection(model, cfg.detection, seed);
    const std::string name = tag + "_" + std::string(to_string(a));
    bundle.add("spectrum_" + name + ".csv", spectrum_csv(sampled));
    bundle.add("transferred_" + name + ".csv", transferred_csv(sampled));
    bundle.add("model_" + name + ".csv", transferred_csv(model));

    // Noiseless peak heights at the nominal sideband positions.
    const double red = 1.0 - model.points[static_cast<std::size_t>(cfg.spectrum.points_per_trap_frequency)].survival;
    const double blue =
        1.0 - model.points[static_cast<std::size_t>(3 * cfg.spectrum.points_per_trap_frequency)].survival;
    const double n = static_cast<double>(cfg.detection.trials_per_point);
    ordered_json ax;
    ax["nbar_true"] = dists[q].mean();
    ax["P0_true"] = dists[q].ground_population();
    ax["red_peak_transferred"] = red;
    ax["blue_peak_transferred"] = blue;
    ax["red_over_blue"] = finite_or_null(red / blue);
    ax["shot_noise_at_blue"] = std::sqrt(blue * (1.0 - blue) / n);
    ax["detection_seed"] = seed;
    report["axes"][std::string(to_string(a))] = ax;
  }
  bundle.add("spectrum_report_" + tag + ".json", report.dump(2) + "\n");
}

void cmd_drift(const ExperimentConfig& cfg, OutputBundle& bundle)
{
  const CoolingSchedule schedule = build_schedule(cfg);
  const auto grid = drift_grid_with_scaled_points(cfg.drift.scan_grid);
  const auto rows = drift_robustness_scan(cfg.initial_nbar, schedule, cfg.pump, cfg.species, grid);
  bundle.add("drift_scan.csv", drift_scan_csv(rows));
}

FitCommandResult cmd_fit(const ExperimentConfig& cfg, const std::vector<Spectrum>& spectra, OutputBundle& bundle)
{
  std::array<bool, 3> seen{};
  for (const auto& s : spectra) {
    if (seen[index(s.axis)])
      throw ConfigError("", "two spectra for axis " + std::string(to_string(s.axis)));
    seen[index(s.axis)] = true;
  }
  const AxisArray omegas = pulse_trap_frequencies(cfg);

  struct Outcome {
    std::optional<ThermometryResult> result;
    std::string error;
  };
  std::vector<Outcome> outcomes(spectra.size());
  // Axes run one after another; each fit parallelises its own bootstrap.
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const Axis a = spectra[i].axis;
    FitOptions opt;
    opt.bootstrap_resamples = cfg.spectrum.bootstrap_resamples;
    opt.confidence = cfg.spectrum.confidence;
    opt.seed = derive_seed(cfg.seed, 0x300 + index(a));
    opt.probe_tau = cfg.raman.shape == EnvelopeShape::Gaussian ? cfg.raman.tau : 0.0;
    try {
      outcomes[i].result = fit_spectrum(spectra[i], omegas[index(a)], opt);
    } catch (const FitError& e) {
      outcomes[i].error = e.what();
    } catch (const NumericalError& e) {
      outcomes[i].error = e.what();
    }
  }

  FitCommandResult out;
  ordered_json& j = out.report;
  j["confidence"] = cfg.spectrum.confidence;
  std::array<std::optional<ThermometryResult>, 3> by_axis;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const std::string name(to_string(spectra[i].axis));
    ordered_json ax;
    if (outcomes[i].result) {
      ax = thermometry_json(*outcomes[i].result);
      by_axis[index(spectra[i].axis)] = outcomes[i].result;
    } else {
      ax["error"] = outcomes[i].error;
      ++out.failed_axes;
    }
    const auto src = spectra[i].metadata.find("source");
    if (src != spectra[i].metadata.end())
      ax["source"] = src->second;
    j["axes"][name] = ax;
  }
  if (by_axis[0] && by_axis[1] && by_axis[2]) {
    const ThreeAxisReport rep = three_axis_report({*by_axis[0], *by_axis[1], *by_axis[2]});
    j["P_3D"] = rep.p3d;
    j["P_3D_err_plus"] = rep.p3d_high - rep.p3d;
    j["P_3D_err_minus"] = rep.p3d - rep.p3d_low;
    j["P_3D_interval"] = {rep.p3d_low, rep.p3d_high};
  } else {
    j["P_3D"] = nullptr;
  }
  bundle.add("fit_report.json", j.dump(2) + "\n");
  return out;
}

std::string resolved_config_text(const ExperimentConfig& cfg) { return cfg.resolved.dump(2) + "\n"; }

void seal_bundle(OutputBundle& bundle, const std::string& command, const ExperimentConfig& cfg,
                 const std::string& started_utc)
{
  const std::string text = resolved_config_text(cfg);
  RunManifest m = make_manifest(command, cfg, text);
  m.started_utc = started_utc;
  m.outputs = bundle.names();
  m.outputs.push_back("config.resolved.json");
  m.finished_utc = utc_timestamp();
  bundle.add("config.resolved.json", text);
  bundle.add("manifest.json", m.to_json().dump(2) + "\n");
}

} // namespace rsc
