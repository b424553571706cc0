#pragma once

#include "rsc/cooling.hpp"
#include "rsc/lamb_dicke.hpp"
#include "rsc/spectroscopy.hpp"
#include "rsc/species.hpp"
#include "rsc/trap.hpp"
#include "rsc/zeeman.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rsc {

inline constexpr const char* toolkit_version = "1.0.0";

/// How the per-axis carrier Rabi frequency is obtained.
/// Beams: Omega1 Omega_j / (2 |Delta|) with RB2 for x and z, RB3 for y.
/// Calibrated: pi area on |n_target> -> |n_target - 1> of each axis.
enum class RabiMode { Beams, Calibrated };

struct RamanSettings {
  RabiMode mode = RabiMode::Beams;
  double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0; // rad/s, peak one-photon Rabi
  double one_photon_detuning = 0.0;                // rad/s from D1
  EnvelopeShape shape = EnvelopeShape::Gaussian;
  double tau = 0.0;    // s
  double window = 0.0; // s
  double stark_offset = 0.0; // rad/s, constant two-photon offset
  int calibration_target_n = 1;
};

/// Trap frequencies and Raman Lamb-Dicke parameters used by pulses. With
/// `from_trap` both are computed from the trap model and beam geometry.
struct MotionSettings {
  bool from_trap = false;
  AxisArray trap_frequencies{};  // rad/s
  LambDickeSet<double> raman_eta;
};

struct ScheduleSettings {
  std::vector<Axis> order;
  double pump_duration = 0.0;
  double pulse_slot = 0.0;
  double idle_tail = 0.0;
  int n_cycles = 0;
  std::vector<int> record_cycles;
};

struct SpectrumSettings {
  int points_per_trap_frequency = 60;
  int bootstrap_resamples = 1000;
  double confidence = 0.95;
};

struct DriftSettings {
  ZeemanLabel scheme = ZeemanLabel::SingleManifold;
  double delta_B = 0.0;           // T, applied by `cool` and `spectrum`
  std::vector<double> scan_grid;  // T, base points of the drift scan
};

struct TrapSettings {
  TrapModel<double> model;
  double cut_half_span = 0.0; // m
  int cut_points = 0;
};

struct ExperimentConfig {
  AtomSpecies<double> species;
  TrapSettings trap;
  RamanSettings raman;
  MotionSettings motion;
  OpticalPumpModel pump;
  ScheduleSettings schedule;
  AxisArray initial_nbar{};
  DetectionModel detection;
  SpectrumSettings spectrum;
  DriftSettings drift;
  long monte_carlo_trials = 0;
  std::uint64_t seed = 0;
  nlohmann::ordered_json resolved; // the validated document, defaults filled in
};

/// Names of shipped presets.
std::vector<std::string> preset_names();
nlohmann::ordered_json preset_document(const std::string& name);

/// Applies `overrides` (RFC 7386 merge patch) to the preset and validates.
/// Keys absent from the preset are rejected with their dotted path.
ExperimentConfig resolve_config(const std::string& preset, const nlohmann::json& overrides);
/// Parses a JSON override file; syntax errors become ConfigError.
nlohmann::json read_config_file(const std::filesystem::path& file);
ExperimentConfig load_config(const std::string& preset, const std::optional<std::filesystem::path>& file);

/// Trap frequencies (rad/s) and Raman Lamb-Dicke set in effect.
AxisArray pulse_trap_frequencies(const ExperimentConfig& cfg);
LambDickeSet<double> raman_lamb_dicke(const ExperimentConfig& cfg);
/// Wavelength of the Raman beams (D1 shifted by the one-photon detuning).
double raman_wavelength(const ExperimentConfig& cfg);

/// Peak carrier Rabi frequency (rad/s) on `axis`.
double carrier_rabi(const ExperimentConfig& cfg, Axis axis);
RamanPulse<double> cooling_pulse(const ExperimentConfig& cfg, Axis axis);
CoolingSchedule build_schedule(const ExperimentConfig& cfg);
std::optional<DriftModel> drift_model(const ExperimentConfig& cfg);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started_utc;
  std::string finished_utc;
  nlohmann::ordered_json model_choices;
  std::vector<std::string> outputs;

  nlohmann::ordered_json to_json() const;
};

RunManifest make_manifest(const std::string& command, const ExperimentConfig& cfg, const std::string& config_text);
std::string utc_timestamp();

} // namespace rsc
