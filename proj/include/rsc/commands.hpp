#pragma once

#include "rsc/config.hpp"
#include "rsc/io.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace rsc {

/// Numbers behind `rsc-sim trap`. Frequencies in Hz, depths in J.
struct TrapReport {
  double depth = 0.0;       // combined trap
  double rodt_depth = 0.0;  // dipole beam alone
  AxisArray frequencies{};  // combined trap, numeric curvature
  AxisArray rodt_frequencies{};
  double analytic_radial_x = 0.0; // sqrt(4 U0 / (m w^2)) with the beam-only depth
  double analytic_radial_y = 0.0;
  double analytic_rodt_axial = 0.0;
  std::optional<double> lattice_constant; // m
  LambDickeSet<double> raman_geometry_eta;
  LambDickeSet<double> raman_eta; // in effect for pulses
  LambDickeSet<double> pump_eta;
};

TrapReport compute_trap_report(const ExperimentConfig& cfg);
nlohmann::ordered_json trap_report_json(const TrapReport& report);

enum class SpectrumStage { Before, After };
std::string_view to_string(SpectrumStage stage);

/// Per-axis phonon distribution before or after the configured schedule.
std::array<Distribution, 3> stage_distributions(const ExperimentConfig& cfg, SpectrumStage stage);

/// Each command fills `bundle` with its data files; nothing touches the disk.
void cmd_trap(const ExperimentConfig& cfg, OutputBundle& bundle);
void cmd_cool(const ExperimentConfig& cfg, bool oracle, OutputBundle& bundle);
void cmd_spectrum(const ExperimentConfig& cfg, SpectrumStage stage, OutputBundle& bundle);
void cmd_drift(const ExperimentConfig& cfg, OutputBundle& bundle);

struct FitCommandResult {
  nlohmann::ordered_json report;
  int failed_axes = 0;
};

/// Fits every spectrum independently. Parse errors propagate; a failing fit is
/// recorded in the report for its axis and the remaining axes still run.
FitCommandResult cmd_fit(const ExperimentConfig& cfg, const std::vector<Spectrum>& spectra, OutputBundle& bundle);

/// Adds config.resolved.json and manifest.json to a finished bundle.
void seal_bundle(OutputBundle& bundle, const std::string& command, const ExperimentConfig& cfg,
                 const std::string& started_utc);

/// Exact text written to config.resolved.json; the manifest hash covers it.
std::string resolved_config_text(const ExperimentConfig& cfg);

} // namespace rsc
