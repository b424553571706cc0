#pragma once

#include "rsc/cooling.hpp"
#include "rsc/spectroscopy.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rsc {

/// Shortest round-trip decimal form ("." separator, no locale).
std::string format_number(double value);

std::string potential_cut_csv(const Eigen::Matrix<double, Eigen::Dynamic, 2>& cut);

/// Trajectory rows at `cycles` (all cycles when empty). Monte Carlo columns are
/// appended when `oracle` is given.
std::string trajectory_csv(const Trajectory& trajectory, const std::vector<int>& cycles = {},
                           const MonteCarloResult* oracle = nullptr);

std::string drift_scan_csv(const std::vector<DriftScanRow>& rows);

std::string spectrum_csv(const Spectrum& spectrum);
/// Population transferred out of the lower state, for figure-style plots.
std::string transferred_csv(const Spectrum& spectrum);

/// Reads a spectrum CSV. The axis comes from a trailing _x, _y or _z in the file
/// stem unless `axis` is given.
Spectrum parse_spectrum_csv(const std::string& text, const std::string& origin, std::optional<Axis> axis);
Spectrum read_spectrum_csv(const std::filesystem::path& path, std::optional<Axis> axis = std::nullopt);
std::optional<Axis> axis_from_filename(const std::filesystem::path& path);

nlohmann::ordered_json thermometry_json(const ThermometryResult& r);

/// Output files collected in memory and written only after a run succeeds.
class OutputBundle {
public:
  void add(const std::string& name, std::string contents);
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
  std::vector<std::string> names() const;
  void write(const std::filesystem::path& directory) const;

private:
  std::vector<std::pair<std::string, std::string>> files_;
};

} // namespace rsc
