#include "rsc/config.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace rsc {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json paper_cs_preset()
{
  return ordered_json::parse(R"({
  "species": {"preset": "cs133", "file": ""},
  "trap": {
    "rodt": {"wavelength_nm": 1052, "power_mW": 35, "waist_x_um": 1.7, "waist_y_um": 1.6},
    "lattice": {"enabled": true, "wavelength_nm": 780, "power_per_beam_mW": 240, "waist_um": 18,
                "crossing_angle_deg": 18},
    "cut_half_span_um": 6, "cut_points": 601
  },
  "raman": {
    "rabi_mode": "beams",
    "omega1_MHz": 122.6, "omega2_MHz": 28.6, "omega3_MHz": 26.2,
    "one_photon_detuning_GHz": -70,
    "shape": "gaussian", "tau_us": 25, "window_us": 300,
    "stark_offset_kHz": 0,
    "calibration_target_n": 1
  },
  "motion": {
    "source": "reference",
    "trap_frequencies_kHz": {"x": 59.5, "y": 69.7, "z": 32.3},
    "raman_lamb_dicke": {"x": 0.16, "y": 0.25, "z": 0.23}
  },
  "pump": {
    "mean_scatter_events": 2.1,
    "lamb_dicke": {"x": 0.172, "y": 0.186, "z": 0.253},
    "efficiency": 1.0,
    "absorption_axis": "x",
    "heat_all_axes": false
  },
  "schedule": {"order": ["z", "y", "x"], "pump_us": 200, "pulse_slot_us": 100, "idle_tail_us": 100,
               "n_cycles": 50, "record_cycles": [0, 10, 20, 30, 40, 50]},
  "initial_nbar": {"x": 4.25, "y": 2.61, "z": 5.33},
  "detection": {"microwave_pi_fidelity": 1.0, "blowaway_survival_F3": 1.0, "blowaway_survival_F4": 0.0,
                "trials_per_point": 100},
  "spectrum": {"points_per_trap_frequency": 60, "bootstrap_resamples": 1000, "confidence": 0.95},
  "drift": {"scheme": "single", "delta_B_mG": 0, "scan_delta_B_mG": [0, 0.25, 0.5, 1, 2, 4, 8]},
  "monte_carlo": {"trials": 100000},
  "seed": 20240601
})");
}

void reject_unknown(const ordered_json& schema, const json& doc, const std::string& path)
{
  if (!doc.is_object())
    return;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string key_path = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key()))
      throw ConfigError(key_path, "unknown key");
    const auto& sub = schema.at(it.key());
    if (sub.is_object() && it.value().is_object())
      reject_unknown(sub, it.value(), key_path);
  }
}

class Reader {
public:
  explicit Reader(const ordered_json& root) : root_(root) {}

  const ordered_json& node(const std::string& path) const
  {
    const ordered_json* cur = &root_;
    std::size_t start = 0;
    while (start <= path.size()) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!cur->is_object() || !cur->contains(key))
        throw ConfigError(path, "missing key");
      cur = &cur->at(key);
      if (dot == std::string::npos)
        break;
      start = dot + 1;
    }
    return *cur;
  }

  double number(const std::string& path) const
  {
    const auto& v = node(path);
    if (!v.is_number())
      throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
      throw ConfigError(path, "expected a finite number");
    return d;
  }

  double positive(const std::string& path) const
  {
    const double d = number(path);
    if (!(d > 0))
      throw ConfigError(path, "must be positive");
    return d;
  }

  double non_negative(const std::string& path) const
  {
    const double d = number(path);
    if (d < 0)
      throw ConfigError(path, "must be non-negative");
    return d;
  }

  double probability(const std::string& path) const
  {
    const double d = number(path);
    if (d < 0 || d > 1)
      throw ConfigError(path, "must lie in [0, 1]");
    return d;
  }

  long long integer(const std::string& path) const
  {
    const auto& v = node(path);
    if (!v.is_number_integer())
      throw ConfigError(path, "expected an integer");
    return v.get<long long>();
  }

  bool boolean(const std::string& path) const
  {
    const auto& v = node(path);
    if (!v.is_boolean())
      throw ConfigError(path, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& path) const
  {
    const auto& v = node(path);
    if (!v.is_string())
      throw ConfigError(path, "expected a string");
    return v.get<std::string>();
  }

  Axis axis(const std::string& path) const
  {
    try {
      return axis_from_string(string(path));
    } catch (const DomainError& e) {
      throw ConfigError(path, e.what());
    }
  }

  AxisArray axis_values(const std::string& path) const
  {
    return {number(path + ".x"), number(path + ".y"), number(path + ".z")};
  }

  std::vector<double> numbers(const std::string& path) const
  {
    const auto& v = node(path);
    if (!v.is_array())
      throw ConfigError(path, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number())
        throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

private:
  const ordered_json& root_;
};

ExperimentConfig interpret(const ordered_json& doc)
{
  const Reader r(doc);
  ExperimentConfig c;
  c.resolved = doc;

  const std::string species_file = r.string("species.file");
  const std::string species_preset = r.string("species.preset");
  if (!species_file.empty()) {
    try {
      c.species = load_species(species_file);
    } catch (const ParseError& e) {
      throw ConfigError("species.file", e.what());
    }
  } else if (species_preset == "cs133") {
    c.species = cesium<double>();
  } else {
    throw ConfigError("species.preset", "unknown species preset '" + species_preset + "'");
  }

  auto& rodt = c.trap.model.rodt;
  rodt.wavelength = r.positive("trap.rodt.wavelength_nm") * 1e-9;
  rodt.power = r.non_negative("trap.rodt.power_mW") * 1e-3;
  rodt.waist_x = r.positive("trap.rodt.waist_x_um") * 1e-6;
  rodt.waist_y = r.positive("trap.rodt.waist_y_um") * 1e-6;
  if (r.boolean("trap.lattice.enabled")) {
    CrossedLattice<double> lat;
    lat.wavelength = r.positive("trap.lattice.wavelength_nm") * 1e-9;
    lat.power_per_beam = r.non_negative("trap.lattice.power_per_beam_mW") * 1e-3;
    lat.waist = r.positive("trap.lattice.waist_um") * 1e-6;
    const double angle = r.positive("trap.lattice.crossing_angle_deg");
    if (!(angle < 180))
      throw ConfigError("trap.lattice.crossing_angle_deg", "must lie in (0, 180)");
    lat.half_angle = 0.5 * angle * constants::pi / 180.0;
    c.trap.model.lattice = lat;
  }
  c.trap.model.species = c.species;
  c.trap.cut_half_span = r.positive("trap.cut_half_span_um") * 1e-6;
  c.trap.cut_points = static_cast<int>(r.integer("trap.cut_points"));
  if (c.trap.cut_points < 3)
    throw ConfigError("trap.cut_points", "needs at least 3 points");
  try {
    c.trap.model.validate();
  } catch (const DomainError& e) {
    throw ConfigError("trap", e.what());
  }

  const std::string mode = r.string("raman.rabi_mode");
  if (mode == "beams")
    c.raman.mode = RabiMode::Beams;
  else if (mode == "calibrated")
    c.raman.mode = RabiMode::Calibrated;
  else
    throw ConfigError("raman.rabi_mode", "expected 'beams' or 'calibrated'");
  c.raman.omega1 = angular_from_hz(r.non_negative("raman.omega1_MHz") * 1e6);
  c.raman.omega2 = angular_from_hz(r.non_negative("raman.omega2_MHz") * 1e6);
  c.raman.omega3 = angular_from_hz(r.non_negative("raman.omega3_MHz") * 1e6);
  c.raman.one_photon_detuning = angular_from_hz(r.number("raman.one_photon_detuning_GHz") * 1e9);
  if (c.raman.one_photon_detuning == 0.0)
    throw ConfigError("raman.one_photon_detuning_GHz", "must be non-zero");
  const std::string shape = r.string("raman.shape");
  if (shape == "gaussian")
    c.raman.shape = EnvelopeShape::Gaussian;
  else if (shape == "square")
    c.raman.shape = EnvelopeShape::Square;
  else
    throw ConfigError("raman.shape", "expected 'gaussian' or 'square'");
  c.raman.tau = r.positive("raman.tau_us") * 1e-6;
  c.raman.window = r.positive("raman.window_us") * 1e-6;
  if (c.raman.window < 2.0 * c.raman.tau)
    throw ConfigError("raman.window_us", "must be at least 2 tau");
  c.raman.stark_offset = angular_from_hz(r.number("raman.stark_offset_kHz") * 1e3);
  c.raman.calibration_target_n = static_cast<int>(r.integer("raman.calibration_target_n"));
  if (c.raman.calibration_target_n < 1)
    throw ConfigError("raman.calibration_target_n", "must be at least 1");

  const std::string source = r.string("motion.source");
  if (source != "reference" && source != "trap")
    throw ConfigError("motion.source", "expected 'reference' or 'trap'");
  c.motion.from_trap = source == "trap";
  const AxisArray f = r.axis_values("motion.trap_frequencies_kHz");
  for (Axis a : all_axes) {
    const std::string p = "motion.trap_frequencies_kHz." + std::string(to_string(a));
    if (!(f[index(a)] > 0))
      throw ConfigError(p, "must be positive");
    c.motion.trap_frequencies[index(a)] = angular_from_hz(f[index(a)] * 1e3);
  }
  const AxisArray eta = r.axis_values("motion.raman_lamb_dicke");
  c.motion.raman_eta = {eta[0], eta[1], eta[2]};
  for (Axis a : all_axes)
    if (!(eta[index(a)] > 0 && eta[index(a)] < 1))
      throw ConfigError("motion.raman_lamb_dicke." + std::string(to_string(a)), "must lie in (0, 1)");

  c.pump.mean_scatter_events = r.positive("pump.mean_scatter_events");
  const AxisArray pe = r.axis_values("pump.lamb_dicke");
  c.pump.eta_op = {pe[0], pe[1], pe[2]};
  for (Axis a : all_axes)
    if (pe[index(a)] < 0 || !(pe[index(a)] < 1))
      throw ConfigError("pump.lamb_dicke." + std::string(to_string(a)), "must lie in [0, 1)");
  c.pump.efficiency = r.probability("pump.efficiency");
  c.pump.absorption_axis = r.axis("pump.absorption_axis");
  c.pump.heat_all_axes = r.boolean("pump.heat_all_axes");

  const auto& order = r.node("schedule.order");
  if (!order.is_array() || order.empty())
    throw ConfigError("schedule.order", "expected a non-empty array of axes");
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string p = "schedule.order[" + std::to_string(i) + "]";
    if (!order[i].is_string())
      throw ConfigError(p, "expected an axis name");
    try {
      c.schedule.order.push_back(axis_from_string(order[i].get<std::string>()));
    } catch (const DomainError& e) {
      throw ConfigError(p, e.what());
    }
  }
  c.schedule.pump_duration = r.non_negative("schedule.pump_us") * 1e-6;
  c.schedule.pulse_slot = r.non_negative("schedule.pulse_slot_us") * 1e-6;
  c.schedule.idle_tail = r.non_negative("schedule.idle_tail_us") * 1e-6;
  const long long n_cycles = r.integer("schedule.n_cycles");
  if (n_cycles < 0 || n_cycles > 1000000)
    throw ConfigError("schedule.n_cycles", "must lie in [0, 1000000]");
  c.schedule.n_cycles = static_cast<int>(n_cycles);
  for (double v : r.numbers("schedule.record_cycles")) {
    if (v < 0 || v != std::floor(v))
      throw ConfigError("schedule.record_cycles", "entries must be non-negative integers");
    c.schedule.record_cycles.push_back(static_cast<int>(v));
  }

  c.initial_nbar = r.axis_values("initial_nbar");
  for (Axis a : all_axes)
    if (c.initial_nbar[index(a)] < 0)
      throw ConfigError("initial_nbar." + std::string(to_string(a)), "must be non-negative");

  c.detection.microwave_pi_fidelity = r.probability("detection.microwave_pi_fidelity");
  c.detection.blowaway_survival_F3 = r.probability("detection.blowaway_survival_F3");
  c.detection.blowaway_survival_F4 = r.probability("detection.blowaway_survival_F4");
  c.detection.trials_per_point = static_cast<long>(r.integer("detection.trials_per_point"));
  if (c.detection.trials_per_point < 1)
    throw ConfigError("detection.trials_per_point", "must be at least 1");

  c.spectrum.points_per_trap_frequency = static_cast<int>(r.integer("spectrum.points_per_trap_frequency"));
  if (c.spectrum.points_per_trap_frequency < 5)
    throw ConfigError("spectrum.points_per_trap_frequency", "must be at least 5");
  c.spectrum.bootstrap_resamples = static_cast<int>(r.integer("spectrum.bootstrap_resamples"));
  if (c.spectrum.bootstrap_resamples < 0)
    throw ConfigError("spectrum.bootstrap_resamples", "must be non-negative");
  c.spectrum.confidence = r.number("spectrum.confidence");
  if (!(c.spectrum.confidence > 0 && c.spectrum.confidence < 1))
    throw ConfigError("spectrum.confidence", "must lie in (0, 1)");

  const std::string scheme = r.string("drift.scheme");
  if (scheme == "single")
    c.drift.scheme = ZeemanLabel::SingleManifold;
  else if (scheme == "inter")
    c.drift.scheme = ZeemanLabel::InterManifold;
  else
    throw ConfigError("drift.scheme", "expected 'single' or 'inter'");
  c.drift.delta_B = r.number("drift.delta_B_mG") * 1e-7;
  for (double v : r.numbers("drift.scan_delta_B_mG")) {
    if (!std::isfinite(v) || v < 0)
      throw ConfigError("drift.scan_delta_B_mG", "entries must be finite and non-negative");
    c.drift.scan_grid.push_back(v * 1e-7);
  }

  const long long trials = r.integer("monte_carlo.trials");
  if (trials < 1)
    throw ConfigError("monte_carlo.trials", "must be at least 1");
  c.monte_carlo_trials = static_cast<long>(trials);

  const auto& seed = r.node("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    throw ConfigError("seed", "expected a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  return c;
}

} // namespace

std::vector<std::string> preset_names() { return {"paper-cs"}; }

ordered_json preset_document(const std::string& name)
{
  if (name == "paper-cs")
    return paper_cs_preset();
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

ExperimentConfig resolve_config(const std::string& preset, const json& overrides)
{
  ordered_json doc = preset_document(preset);
  if (!overrides.is_null()) {
    if (!overrides.is_object())
      throw ConfigError("", "configuration must be a JSON object");
    reject_unknown(doc, overrides, "");
    doc.merge_patch(ordered_json(overrides));
  }
  return interpret(doc);
}

nlohmann::json read_config_file(const std::filesystem::path& file)
{
  std::ifstream in(file);
  if (!in)
    throw ConfigError("", "cannot open config file " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", file.string() + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::string& preset, const std::optional<std::filesystem::path>& file)
{
  return resolve_config(preset, file ? read_config_file(*file) : json());
}

AxisArray pulse_trap_frequencies(const ExperimentConfig& cfg)
{
  if (!cfg.motion.from_trap)
    return cfg.motion.trap_frequencies;
  const auto w = trap_frequencies(cfg.trap.model);
  return {w[0], w[1], w[2]};
}

double raman_wavelength(const ExperimentConfig& cfg)
{
  return detuned_wavelength(cfg.species.d1_wavelength, cfg.raman.one_photon_detuning);
}

LambDickeSet<double> raman_lamb_dicke(const ExperimentConfig& cfg)
{
  if (!cfg.motion.from_trap)
    return cfg.motion.raman_eta;
  const AxisArray w = pulse_trap_frequencies(cfg);
  RamanGeometry<double> g;
  g.wavelength = raman_wavelength(cfg);
  return raman_lamb_dicke_from_geometry(g, cfg.species.mass, Eigen::Vector3d(w[0], w[1], w[2]));
}

double carrier_rabi(const ExperimentConfig& cfg, Axis axis)
{
  if (cfg.raman.mode == RabiMode::Beams) {
    const double partner = axis == Axis::y ? cfg.raman.omega3 : cfg.raman.omega2;
    return std::abs(carrier_peak_rabi(cfg.raman.omega1, partner, cfg.raman.one_photon_detuning));
  }
  const double eta = raman_lamb_dicke(cfg)[axis];
  if (cfg.raman.shape == EnvelopeShape::Square)
    return constants::pi / (2.0 * cfg.raman.tau * eta * std::sqrt(double(cfg.raman.calibration_target_n)));
  return calibrate_pi_pulse(eta, cfg.raman.tau, cfg.raman.window, cfg.raman.calibration_target_n);
}

RamanPulse<double> cooling_pulse(const ExperimentConfig& cfg, Axis axis)
{
  RamanPulse<double> p;
  p.envelope = Envelope<double>{cfg.raman.shape, carrier_rabi(cfg, axis), cfg.raman.tau, cfg.raman.window};
  if (cfg.raman.shape == EnvelopeShape::Square)
    p.envelope.window = std::max(cfg.raman.window, 2.0 * cfg.raman.tau);
  p.detuning = cfg.raman.stark_offset;
  p.axis = axis;
  p.eta = raman_lamb_dicke(cfg)[axis];
  p.target_sideband = -1;
  p.trap_frequency = pulse_trap_frequencies(cfg)[index(axis)];
  p.validate();
  return p;
}

CoolingSchedule build_schedule(const ExperimentConfig& cfg)
{
  CoolingSchedule s;
  for (Axis a : cfg.schedule.order)
    s.steps.push_back({cfg.schedule.pump_duration, cfg.schedule.pulse_slot, true, cooling_pulse(cfg, a)});
  s.idle_tail = cfg.schedule.idle_tail;
  s.n_cycles = cfg.schedule.n_cycles;
  s.validate();
  return s;
}

std::optional<DriftModel> drift_model(const ExperimentConfig& cfg)
{
  if (cfg.drift.delta_B == 0.0)
    return std::nullopt;
  return DriftModel{make_zeeman_scheme(cfg.drift.scheme, cfg.species), cfg.drift.delta_B};
}

std::string fnv1a_hex(const std::string& bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp()
{
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json RunManifest::to_json() const
{
  ordered_json j;
  j["toolkit"] = "rsc-sim";
  j["version"] = toolkit_version;
  j["command"] = command;
  j["config_file"] = "config.resolved.json";
  j["config_hash_fnv1a64"] = config_hash;
  j["seed"] = seed;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  j["model_choices"] = model_choices;
  j["outputs"] = outputs;
  return j;
}

RunManifest make_manifest(const std::string& command, const ExperimentConfig& cfg, const std::string& config_text)
{
  RunManifest m;
  m.command = command;
  m.config_hash = fnv1a_hex(config_text);
  m.seed = cfg.seed;
  m.started_utc = utc_timestamp();
  ordered_json choices;
  choices["polarizability_model"] = "two-line D1/D2 scalar, rotating-wave";
  choices["pump_kick_geometry"] = "absorption along " + std::string(to_string(cfg.pump.absorption_axis)) +
                                  ", isotropic emission; per-event eta^2 (delta_q,abs + 1/3)";
  choices["pump_heating_map"] = "exp(mean_scatter_events * G), birth-death generator";
  choices["pump_heats"] = cfg.pump.heat_all_axes ? "all axes" : "axis cooled next";
  choices["pump_efficiency"] = cfg.pump.efficiency;
  choices["raman_rabi_mode"] = cfg.raman.mode == RabiMode::Beams ? "beams" : "calibrated";
  choices["raman_window_us"] = cfg.raman.window * 1e6;
  choices["off_resonant_channels"] = "carrier and blue sideband, independent incoherent branches";
  choices["motion_source"] = cfg.motion.from_trap ? "trap" : "reference";
  m.model_choices = choices;
  return m;
}

} // namespace rsc
