#pragma once

#include "rsc/axis.hpp"
#include "rsc/cooling.hpp"
#include "rsc/pulse.hpp"
#include "rsc/thermal.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rsc {

struct SpectrumPoint {
  double detuning_hz = 0.0; // relative to the carrier
  double survival = 0.0;    // probability the atom is still in the lower state
  long trials = 0;          // 0 for noiseless spectra
  long successes = 0;
};

struct Spectrum {
  std::vector<SpectrumPoint> points;
  Axis axis = Axis::x;
  std::map<std::string, std::string> metadata;

  bool sampled() const;
  void validate() const;
};

/// Microwave pi pulse |4,4> -> |3,3> followed by a blow-away of F = 4.
struct DetectionModel {
  double microwave_pi_fidelity = 1.0;
  double blowaway_survival_F3 = 1.0;
  double blowaway_survival_F4 = 0.0;
  long trials_per_point = 100;

  void validate() const;
  /// Probability of a stay event for an atom left in the lower state with
  /// probability `survival`.
  double stay_probability(double survival) const;
};

/// Uniform detuning grid in Hz spanning [-2 omega, 2 omega] with
/// `points_per_trap_frequency` intervals per omega (the grid hits 0 and +-omega).
std::vector<double> sideband_grid_hz(double trap_frequency, int points_per_trap_frequency = 60);

/// Transfer probability out of the lower state for each (grid detuning, phonon
/// number) pair: red, carrier and blue channels combined as independent branches.
struct SidebandResponse {
  std::vector<double> detuning_hz;
  Eigen::MatrixXd transfer; // rows: detuning, columns: n
  Axis axis = Axis::x;
};

SidebandResponse sideband_response(const RamanPulse<double>& probe, const std::vector<double>& detuning_hz,
                                   int n_max);

Spectrum spectrum_from_response(const SidebandResponse& response, const Distribution& dist);

/// Noiseless survival spectrum of `dist` probed with `probe`.
Spectrum scan_sideband_spectrum(const Distribution& dist, const RamanPulse<double>& probe,
                                const std::vector<double>& detuning_hz);

/// Binomial stay counts per point.
Spectrum simulate_detection(const Spectrum& noiseless, const DetectionModel& detection, std::uint64_t seed);

struct ValueWithErrors {
  double value = 0.0;
  double err_plus = 0.0;
  double err_minus = 0.0;
};

struct FitDiagnostics {
  double residual_norm = 0.0;
  std::array<double, 3> centers_hz{};   // red, carrier, blue
  std::array<double, 3> amplitudes{};   // transferred population
  std::array<double, 2> widths_hz{};    // sidebands, carrier
  double baseline = 0.0;
  int evaluations = 0;
  int bootstrap_resamples = 0;
};

struct ThermometryResult {
  Axis axis = Axis::x;
  double ratio = 0.0; // red / blue amplitude
  ValueWithErrors nbar;
  bool nbar_lower_bound = false; // ratio >= 1: nbar only bounded from below
  std::array<double, 2> nbar_interval{}; // bootstrap interval, upper end may be infinite
  double trap_frequency = 0.0;   // rad/s used for the temperature
  double temperature = 0.0;      // K, Bose-Einstein inversion
  double temperature_classical = 0.0;
  ValueWithErrors ground_state_population;
  FitDiagnostics diagnostics;
};

struct FitOptions {
  int bootstrap_resamples = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  double width_guess_hz = 0.0; // 0: derived from probe_tau or the grid
  double probe_tau = 0.0;      // s, Gaussian probe envelope
};

/// Three Gaussian peaks (sidebands symmetric about the carrier, shared sideband
/// width, separate carrier width) plus a flat baseline, fitted to the
/// transferred population 1 - survival. The baseline is taken from the
/// peak-free wings beyond 1.5 omega when the grid has at least five points
/// there, and fitted together with the peaks otherwise.
ThermometryResult fit_spectrum(const Spectrum& spectrum, double omega_guess, const FitOptions& options = {});

/// Nbar from a red/blue ratio, clamped to >= 0; infinity for ratio >= 1.
double nbar_from_fitted_ratio(double ratio);

struct ThreeAxisReport {
  std::array<ThermometryResult, 3> axes;
  double p3d = 0.0;
  double p3d_low = 0.0;
  double p3d_high = 0.0;
};

/// Product of per-axis ground-state populations 1 / (nbar + 1).
double ground_population_3d(const AxisArray& nbars);

ThreeAxisReport three_axis_report(const std::array<ThermometryResult, 3>& results);

} // namespace rsc
