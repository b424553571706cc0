#include <doctest.h>

#include "rsc/commands.hpp"
#include "rsc/config.hpp"
#include "rsc/io.hpp"
#include "rsc/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <string>

using namespace rsc;

namespace {

std::string config_error_path(const nlohmann::json& overrides)
{
  try {
    resolve_config("paper-cs", overrides);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

const char* kSpeciesText = R"(# caesium
name = Cs133
mass_kg = 2.20694695e-25
d1_wavelength_m = 894.59295986e-9
d2_wavelength_m = 852.34727582e-9
d1_linewidth_Hz = 4.5612e6
d2_linewidth_Hz = 5.2227e6
hyperfine_splitting_Hz = 9.192631770e9
lande_gF_upper = 0.25
lande_gF_lower = -0.25
)";

} // namespace

TEST_SUITE("config")
{
  TEST_CASE("preset resolves to the reference numbers")
  {
    const auto cfg = resolve_config("paper-cs", nlohmann::json());
    CHECK(cfg.raman.tau == doctest::Approx(25e-6));
    CHECK(cfg.raman.one_photon_detuning == doctest::Approx(-2 * constants::pi * 70e9));
    CHECK(cfg.initial_nbar[1] == doctest::Approx(2.61));
    CHECK(cfg.schedule.n_cycles == 50);
    CHECK(cfg.schedule.record_cycles == std::vector<int>{0, 10, 20, 30, 40, 50});
    CHECK(raman_lamb_dicke(cfg).eta_z == doctest::Approx(0.23));
    CHECK(hz_from_angular(pulse_trap_frequencies(cfg)[2]) == doctest::Approx(32.3e3));
    CHECK(cfg.monte_carlo_trials == 100000);
    CHECK_FALSE(drift_model(cfg));
  }

  TEST_CASE("overrides merge into the preset")
  {
    const auto cfg = resolve_config("paper-cs", {{"seed", 5}, {"raman", {{"tau_us", 30}}}});
    CHECK(cfg.seed == 5);
    CHECK(cfg.raman.tau == doctest::Approx(30e-6));
    CHECK(cfg.raman.window == doctest::Approx(300e-6));
    CHECK(cfg.resolved["raman"]["tau_us"] == 30);
  }

  TEST_CASE("unknown keys are rejected with their dotted path")
  {
    CHECK(config_error_path({{"raman", {{"tau_ms", 1}}}}) == "raman.tau_ms");
    CHECK(config_error_path({{"trap", {{"lattice", {{"colour", 1}}}}}}) == "trap.lattice.colour");
    CHECK(config_error_path({{"bogus", 1}}) == "bogus");
  }

  TEST_CASE("invalid values are rejected with their dotted path")
  {
    CHECK(config_error_path({{"raman", {{"tau_us", -1}}}}) == "raman.tau_us");
    CHECK(config_error_path({{"raman", {{"tau_us", "long"}}}}) == "raman.tau_us");
    CHECK(config_error_path({{"schedule", {{"order", {"z", "w"}}}}}) == "schedule.order[1]");
    CHECK(config_error_path({{"raman", {{"rabi_mode", "guess"}}}}) == "raman.rabi_mode");
    CHECK_THROWS_AS(resolve_config("other", nlohmann::json()), ConfigError);
    CHECK_THROWS_AS(resolve_config("paper-cs", nlohmann::json::array()), ConfigError);
  }

  TEST_CASE("drift settings")
  {
    const auto cfg = resolve_config("paper-cs", {{"drift", {{"delta_B_mG", 2}, {"scheme", "inter"}}}});
    REQUIRE(drift_model(cfg));
    CHECK(drift_model(cfg)->delta_B == doctest::Approx(2e-7));
    CHECK(drift_model(cfg)->scheme.label == ZeemanLabel::InterManifold);
  }

  TEST_CASE("calibrated Rabi mode makes n=1 a pi pulse")
  {
    const auto cfg = resolve_config("paper-cs", {{"raman", {{"rabi_mode", "calibrated"}}}});
    const auto p = cooling_pulse(cfg, Axis::z);
    CHECK(pulse_area(p.envelope) * p.eta == doctest::Approx(constants::pi).epsilon(1e-12));
  }

  TEST_CASE("FNV-1a reference values")
  {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
  }

  TEST_CASE("manifest records the model choices")
  {
    const auto cfg = resolve_config("paper-cs", nlohmann::json());
    OutputBundle b;
    b.add("x.csv", "a\n");
    seal_bundle(b, "cool", cfg, "2000-01-01T00:00:00Z");
    const auto names = b.names();
    REQUIRE(names.size() == 3);
    const auto manifest = nlohmann::json::parse(b.files()[2].second);
    CHECK(manifest["config_hash_fnv1a64"] == fnv1a_hex(b.files()[1].second));
    CHECK(manifest["seed"] == cfg.seed);
    CHECK(manifest["version"] == toolkit_version);
    CHECK(manifest["model_choices"].contains("pump_kick_geometry"));
    CHECK(manifest["model_choices"].contains("polarizability_model"));
  }
}

TEST_SUITE("species")
{
  TEST_CASE("parse a species file")
  {
    const auto s = parse_species(kSpeciesText);
    const auto cs = cesium<double>();
    CHECK(s.mass == doctest::Approx(cs.mass).epsilon(1e-8));
    CHECK(s.d1_wavelength == doctest::Approx(cs.d1_wavelength));
    CHECK(s.d2_linewidth == doctest::Approx(cs.d2_linewidth));
    CHECK(s.hyperfine_splitting == doctest::Approx(cs.hyperfine_splitting));
  }

  TEST_CASE("species errors carry line numbers")
  {
    auto line_of = [](const std::string& text) -> std::size_t {
      try {
        parse_species(text);
      } catch (const ParseError& e) {
        return e.line();
      }
      return 9999;
    };
    CHECK(line_of(std::string(kSpeciesText) + "colour = red\n") == 11);
    CHECK(line_of(std::string(kSpeciesText) + "mass_kg = 1\n") == 11);
    CHECK(line_of("name = x\nmass_kg = heavy\n") == 2);
    CHECK(line_of("name = x\njust words\n") == 2);
    CHECK_THROWS_AS(parse_species("name = x\nmass_kg = 1e-25\n"), ParseError);
  }
}

TEST_SUITE("io")
{
  TEST_CASE("numbers use the shortest round-trip form")
  {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2.5e-8) == "2.5e-08");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    for (double v : {1.0 / 3.0, 6.02214076e23, -4.25e-300})
      CHECK(std::stod(format_number(v)) == v);
  }

  TEST_CASE("spectrum CSV round trip")
  {
    Spectrum s;
    s.axis = Axis::z;
    s.points = {{-1000.5, 0.25, 100, 25}, {0.0, 1.0, 100, 100}};
    const Spectrum back = parse_spectrum_csv(spectrum_csv(s), "mem", Axis::z);
    REQUIRE(back.points.size() == 2);
    CHECK(back.points[0].detuning_hz == -1000.5);
    CHECK(back.points[1].successes == 100);
  }

  TEST_CASE("spectrum CSV errors")
  {
    auto line_of = [](const std::string& text) -> std::size_t {
      try {
        parse_spectrum_csv(text, "mem", Axis::x);
      } catch (const ParseError& e) {
        return e.line();
      }
      return 9999;
    };
    CHECK(line_of("") == 1);
    CHECK(line_of("detuning_Hz,survival,trials,successes\n") == 1);
    CHECK(line_of("freq,survival,trials,successes\n1,0.5,10,5\n") == 1);
    CHECK(line_of("detuning_Hz,survival,trials,successes\n1,0.5,10,5\n2,abc,10,5\n") == 3);
    CHECK(line_of("detuning_Hz,survival,trials,successes\n1,0.5,10\n") == 2);
    CHECK(line_of("detuning_Hz,survival,trials,successes\n1,0.5,10,11\n") == 2);
    CHECK(line_of("detuning_Hz,survival,trials,successes\n1,1.5,10,5\n") == 2);
    CHECK_THROWS_AS(parse_spectrum_csv("detuning_Hz,survival,trials,successes\n1,0.5,10,5\n", "mem", std::nullopt),
                    ParseError);
  }

  TEST_CASE("axis comes from the file name")
  {
    CHECK(axis_from_filename("out/spectrum_before_x.csv") == Axis::x);
    CHECK(axis_from_filename("z_scan_z.csv") == Axis::z);
    CHECK_FALSE(axis_from_filename("spectrum.csv"));
  }

  TEST_CASE("output bundle writes every file")
  {
    const auto dir = std::filesystem::temp_directory_path() / "rsc_bundle_test";
    std::filesystem::remove_all(dir);
    OutputBundle b;
    b.add("a.txt", "alpha");
    b.add("b.txt", "beta");
    b.write(dir);
    std::ifstream in(dir / "b.txt");
    std::string text;
    std::getline(in, text);
    CHECK(text == "beta");
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator()) == 2);
    std::filesystem::remove_all(dir);
  }
}

TEST_SUITE("parallel")
{
  TEST_CASE("seeds are derived deterministically")
  {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
  }

  TEST_CASE("parallel_for visits every index once and rethrows")
  {
    setenv("RSC_SIM_THREADS", "3", 1);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits)
      CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                      if (i == 7)
                        throw NumericalError("boom");
                    }),
                    NumericalError);
    unsetenv("RSC_SIM_THREADS");
  }
}
