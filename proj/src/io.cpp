#include "rsc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rsc {

std::string format_number(double value)
{
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string potential_cut_csv(const Eigen::Matrix<double, Eigen::Dynamic, 2>& cut)
{
  std::ostringstream out;
  out << "coordinate_m,potential_J,potential_mK\n";
  for (Eigen::Index i = 0; i < cut.rows(); ++i)
    out << format_number(cut(i, 0)) << ',' << format_number(cut(i, 1)) << ','
        << format_number(millikelvin_from_joule(cut(i, 1))) << '\n';
  return out.str();
}

std::string trajectory_csv(const Trajectory& trajectory, const std::vector<int>& cycles, const MonteCarloResult* oracle)
{
  std::ostringstream out;
  out << "cycle,nbar_x,nbar_y,nbar_z,P0_x,P0_y,P0_z,P_3D";
  if (oracle)
    out << ",mc_nbar_x,mc_nbar_y,mc_nbar_z,mc_nbar_x_se,mc_nbar_y_se,mc_nbar_z_se,mc_P0_x,mc_P0_y,mc_P0_z,mc_P0_x_se,"
           "mc_P0_y_se,mc_P0_z_se,mc_P_3D,mc_P_3D_se";
  out << '\n';
  auto row = [&](const TrajectoryPoint& p) {
    out << p.cycle;
    for (double v : p.nbar)
      out << ',' << format_number(v);
    for (double v : p.p0)
      out << ',' << format_number(v);
    out << ',' << format_number(p.p3d);
    if (oracle) {
      const auto& m = oracle->points.at(static_cast<std::size_t>(p.cycle));
      for (const auto* arr : {&m.nbar, &m.nbar_se, &m.p0, &m.p0_se})
        for (double v : *arr)
          out << ',' << format_number(v);
      out << ',' << format_number(m.p3d) << ',' << format_number(m.p3d_se);
    }
    out << '\n';
  };
  if (cycles.empty()) {
    for (const auto& p : trajectory)
      row(p);
  } else {
    for (int c : cycles)
      if (c >= 0 && static_cast<std::size_t>(c) < trajectory.size())
        row(trajectory[static_cast<std::size_t>(c)]);
  }
  return out.str();
}

std::string drift_scan_csv(const std::vector<DriftScanRow>& rows)
{
  std::ostringstream out;
  out << "delta_B_T,scheme,P_3D,scaling_residual\n";
  for (const auto& r : rows)
    out << format_number(r.delta_B) << ',' << to_string(r.scheme) << ',' << format_number(r.p3d) << ','
        << (r.scaling_residual ? format_number(*r.scaling_residual) : std::string()) << '\n';
  return out.str();
}

std::string spectrum_csv(const Spectrum& spectrum)
{
  std::ostringstream out;
  out << "detuning_Hz,survival,trials,successes\n";
  for (const auto& p : spectrum.points)
    out << format_number(p.detuning_hz) << ',' << format_number(p.survival) << ',' << p.trials << ',' << p.successes
        << '\n';
  return out.str();
}

std::string transferred_csv(const Spectrum& spectrum)
{
  std::ostringstream out;
  out << "detuning_Hz,transferred\n";
  for (const auto& p : spectrum.points)
    out << format_number(p.detuning_hz) << ',' << format_number(1.0 - p.survival) << '\n';
  return out.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ','))
    out.push_back(field);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

std::string strip(std::string s)
{
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t'))
    ++b;
  return s.substr(b);
}

template <typename T>
T parse_field(const std::string& text, const std::string& origin, std::size_t line, const char* column)
{
  T v{};
  const std::string s = strip(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(origin, line, std::string("column ") + column + ": cannot parse '" + s + "'");
  return v;
}

} // namespace

std::optional<Axis> axis_from_filename(const std::filesystem::path& path)
{
  const std::string stem = path.stem().string();
  if (stem.size() >= 2 && stem[stem.size() - 2] == '_') {
    const char c = stem.back();
    if (c == 'x')
      return Axis::x;
    if (c == 'y')
      return Axis::y;
    if (c == 'z')
      return Axis::z;
  }
  return std::nullopt;
}

Spectrum parse_spectrum_csv(const std::string& text, const std::string& origin, std::optional<Axis> axis)
{
  if (!axis)
    throw ParseError(origin, 0, "cannot infer the axis; name the file *_x.csv, *_y.csv or *_z.csv");
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool header = false;
  Spectrum s;
  s.axis = *axis;
  while (std::getline(in, line)) {
    ++number;
    line = strip(line);
    if (line.empty())
      continue;
    const auto fields = split_fields(line);
    if (!header) {
      if (fields.size() != 4 || strip(fields[0]) != "detuning_Hz" || strip(fields[1]) != "survival" ||
          strip(fields[2]) != "trials" || strip(fields[3]) != "successes")
        throw ParseError(origin, number, "expected header 'detuning_Hz,survival,trials,successes'");
      header = true;
      continue;
    }
    if (fields.size() != 4)
      throw ParseError(origin, number, "expected 4 columns, found " + std::to_string(fields.size()));
    SpectrumPoint p;
    p.detuning_hz = parse_field<double>(fields[0], origin, number, "detuning_Hz");
    p.survival = parse_field<double>(fields[1], origin, number, "survival");
    p.trials = parse_field<long>(fields[2], origin, number, "trials");
    p.successes = parse_field<long>(fields[3], origin, number, "successes");
    if (!std::isfinite(p.detuning_hz))
      throw ParseError(origin, number, "detuning must be finite");
    if (!(p.survival >= 0.0 && p.survival <= 1.0))
      throw ParseError(origin, number, "survival must lie in [0, 1]");
    if (p.trials < 0 || p.successes < 0 || p.successes > p.trials)
      throw ParseError(origin, number, "need 0 <= successes <= trials");
    s.points.push_back(p);
  }
  if (!header)
    throw ParseError(origin, number ? number : 1, "empty spectrum file");
  if (s.points.empty())
    throw ParseError(origin, number, "spectrum has no data rows");
  return s;
}

Spectrum read_spectrum_csv(const std::filesystem::path& path, std::optional<Axis> axis)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  Spectrum s = parse_spectrum_csv(buf.str(), path.string(), axis ? axis : axis_from_filename(path));
  s.metadata["source"] = path.string();
  return s;
}

nlohmann::ordered_json thermometry_json(const ThermometryResult& r)
{
  auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v))
      return v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["nbar"] = num(r.nbar.value);
  j["err_plus"] = num(r.nbar.err_plus);
  j["err_minus"] = num(r.nbar.err_minus);
  j["nbar_lower_bound"] = r.nbar_lower_bound;
  j["nbar_interval"] = {num(r.nbar_interval[0]), num(r.nbar_interval[1])};
  j["T_K"] = num(r.temperature);
  j["T_classical_K"] = num(r.temperature_classical);
  j["P0"] = num(r.ground_state_population.value);
  j["P0_err_plus"] = num(r.ground_state_population.err_plus);
  j["P0_err_minus"] = num(r.ground_state_population.err_minus);
  j["ratio"] = num(r.ratio);
  j["trap_frequency_Hz"] = num(hz_from_angular(r.trap_frequency));
  nlohmann::ordered_json d;
  d["residual_norm"] = num(r.diagnostics.residual_norm);
  d["centers_Hz"] = {num(r.diagnostics.centers_hz[0]), num(r.diagnostics.centers_hz[1]),
                     num(r.diagnostics.centers_hz[2])};
  d["amplitudes"] = {num(r.diagnostics.amplitudes[0]), num(r.diagnostics.amplitudes[1]),
                     num(r.diagnostics.amplitudes[2])};
  d["sideband_width_Hz"] = num(r.diagnostics.widths_hz[0]);
  d["carrier_width_Hz"] = num(r.diagnostics.widths_hz[1]);
  d["baseline"] = num(r.diagnostics.baseline);
  d["bootstrap_resamples"] = r.diagnostics.bootstrap_resamples;
  j["fit_diagnostics"] = d;
  return j;
}

void OutputBundle::add(const std::string& name, std::string contents) { files_.emplace_back(name, std::move(contents)); }

std::vector<std::string> OutputBundle::names() const
{
  std::vector<std::string> out;
  for (const auto& f : files_)
    out.push_back(f.first);
  return out;
}

void OutputBundle::write(const std::filesystem::path& directory) const
{
  std::filesystem::create_directories(directory);
  for (const auto& [name, contents] : files_) {
    const auto target = directory / name;
    const auto temp = directory / (name + ".tmp");
    {
      std::ofstream out(temp, std::ios::binary | std::ios::trunc);
      if (!out)
        throw std::runtime_error("cannot write " + temp.string());
      out << contents;
      if (!out)
        throw std::runtime_error("failed writing " + temp.string());
    }
    std::filesystem::rename(temp, target);
  }
}

} // namespace rsc
