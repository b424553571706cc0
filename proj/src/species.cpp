#include "rsc/species.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace rsc {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& origin, std::size_t line)
{
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(origin, line, "expected a number, got '" + text + "'");
  return v;
}

} // namespace

AtomSpecies<double> parse_species(const std::string& text, const std::string& origin)
{
  AtomSpecies<double> s;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string content = trim(raw);
    if (content.empty() || content.front() == '#')
      continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin, line, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (!seen.insert(key).second)
      throw ParseError(origin, line, "duplicate key '" + key + "'");
    if (key == "name")
      s.name = value;
    else if (key == "mass_kg")
      s.mass = parse_number(value, origin, line);
    else if (key == "d1_wavelength_m")
      s.d1_wavelength = parse_number(value, origin, line);
    else if (key == "d2_wavelength_m")
      s.d2_wavelength = parse_number(value, origin, line);
    else if (key == "d1_linewidth_Hz")
      s.d1_linewidth = angular_from_hz(parse_number(value, origin, line));
    else if (key == "d2_linewidth_Hz")
      s.d2_linewidth = angular_from_hz(parse_number(value, origin, line));
    else if (key == "hyperfine_splitting_Hz")
      s.hyperfine_splitting = angular_from_hz(parse_number(value, origin, line));
    else if (key == "lande_gF_upper")
      s.lande_gF_upper = parse_number(value, origin, line);
    else if (key == "lande_gF_lower")
      s.lande_gF_lower = parse_number(value, origin, line);
    else
      throw ParseError(origin, line, "unknown key '" + key + "'");
  }
  for (const char* required : {"mass_kg", "d1_wavelength_m", "d2_wavelength_m", "d1_linewidth_Hz", "d2_linewidth_Hz",
                               "hyperfine_splitting_Hz", "lande_gF_upper", "lande_gF_lower"})
    if (!seen.count(required))
      throw ParseError(origin, 0, std::string("missing key '") + required + "'");
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ParseError(origin, 0, e.what());
  }
  return s;
}

AtomSpecies<double> load_species(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError(path.string(), 0, "cannot open species file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_species(buf.str(), path.string());
}

} // namespace rsc
