// rsc-sim: command-line front end for the Raman sideband cooling toolkit.

#include "rsc/commands.hpp"
#include "rsc/log.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { ok = 0, config_error = 2, numerical_error = 3, fit_error = 4 };

struct CommonFlags {
  std::string preset = "paper-cs";
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::string out = "rsc_out";
  bool oracle = false;
  bool quiet = false;
};

rsc::ExperimentConfig build_config(const CommonFlags& flags, const std::string& command)
{
  nlohmann::json overrides = flags.config_path.empty() ? nlohmann::json::object()
                                                       : rsc::read_config_file(flags.config_path);
  if (!overrides.is_object())
    throw rsc::ConfigError("", "configuration must be a JSON object");
  nlohmann::json cli = nlohmann::json::object();
  if (flags.seed)
    cli["seed"] = *flags.seed;
  if (flags.trials) {
    // --trials sizes whatever the command samples.
    if (command == "cool")
      cli["monte_carlo"]["trials"] = *flags.trials;
    else
      cli["detection"]["trials_per_point"] = *flags.trials;
  }
  overrides.merge_patch(cli);
  return rsc::resolve_config(flags.preset, overrides);
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Raman sideband cooling simulator for a single trapped atom"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rsc::toolkit_version));

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", flags.preset, "Base preset")->check(CLI::IsMember(rsc::preset_names()));
    sub->add_option("--config", flags.config_path, "JSON overrides applied on top of the preset");
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_flag("--quiet", flags.quiet, "Suppress warnings");
  };

  auto* trap = app.add_subcommand("trap", "Trap depth, frequencies, Lamb-Dicke sets and potential cuts");
  add_common(trap);

  auto* cool = app.add_subcommand("cool", "Cooling trajectory over the configured schedule");
  add_common(cool);
  cool->add_flag("--oracle", flags.oracle, "Append Monte Carlo columns");
  cool->add_option("--trials", flags.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);

  std::string stage = "before";
  auto* spectrum = app.add_subcommand("spectrum", "Sampled sideband spectra on every axis");
  add_common(spectrum);
  spectrum->add_option("--stage", stage, "before or after the cooling schedule")
      ->check(CLI::IsMember({"before", "after"}));
  spectrum->add_option("--trials", flags.trials, "Detection trials per point")->check(CLI::PositiveNumber);

  std::vector<std::string> csv_paths;
  auto* fit = app.add_subcommand("fit", "Sideband thermometry from spectrum CSV files");
  add_common(fit);
  fit->add_option("spectra", csv_paths, "Spectrum CSVs named *_x.csv, *_y.csv, *_z.csv")->required();

  auto* drift = app.add_subcommand("drift", "Final 3D ground-state population against field drift");
  add_common(drift);

  CLI11_PARSE(app, argc, argv);
  if (flags.quiet)
    rsc::set_warnings_enabled(false);

  const std::string command = app.get_subcommands().front()->get_name();
  const std::string started = rsc::utc_timestamp();
  try {
    const rsc::ExperimentConfig cfg = build_config(flags, command);
    rsc::OutputBundle bundle;
    int code = ok;
    if (command == "trap") {
      rsc::cmd_trap(cfg, bundle);
    } else if (command == "cool") {
      rsc::cmd_cool(cfg, flags.oracle, bundle);
    } else if (command == "spectrum") {
      rsc::cmd_spectrum(cfg, stage == "after" ? rsc::SpectrumStage::After : rsc::SpectrumStage::Before, bundle);
    } else if (command == "fit") {
      std::vector<rsc::Spectrum> spectra;
      for (const auto& p : csv_paths)
        spectra.push_back(rsc::read_spectrum_csv(p));
      const auto result = rsc::cmd_fit(cfg, spectra, bundle);
      if (result.failed_axes > 0) {
        for (const auto& [axis, entry] : result.report["axes"].items())
          if (entry.contains("error"))
            std::cerr << "rsc-sim: fit failed on axis " << axis << ": " << entry["error"].get<std::string>() << '\n';
        code = fit_error;
      }
    } else if (command == "drift") {
      rsc::cmd_drift(cfg, bundle);
    }
    rsc::seal_bundle(bundle, command, cfg, started);
    bundle.write(flags.out);
    for (const auto& name : bundle.names())
      std::cout << (std::filesystem::path(flags.out) / name).string() << '\n';
    return code;
  } catch (const rsc::ConfigError& e) {
    std::cerr << "rsc-sim: config error: " << e.what() << '\n';
    return config_error;
  } catch (const rsc::ParseError& e) {
    std::cerr << "rsc-sim: parse error: " << e.what() << '\n';
    return config_error;
  } catch (const rsc::FitError& e) {
    std::cerr << "rsc-sim: fit error: " << e.what() << '\n';
    return fit_error;
  } catch (const rsc::NumericalError& e) {
    std::cerr << "rsc-sim: numerical error: " << e.what() << '\n';
    return numerical_error;
  } catch (const rsc::DomainError& e) {
    std::cerr << "rsc-sim: invalid input: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "rsc-sim: " << e.what() << '\n';
    return 1;
  }
}
