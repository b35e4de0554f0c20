#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "vanc/config.hpp"
#include "vanc/errors.hpp"
#include "vanc/runner.hpp"
#include "vanc/scenarios.hpp"

using namespace vanc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioConfig ci(std::string_view name) { return ci_profile(builtin_variants(name).front()); }

// The fig4a CI run is shared by several cases.
const RunReport& fig4a_ci() {
  static const RunReport r = run_scenario(ci("fig4a-left"));
  return r;
}

fs::path fresh_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / (std::string("vanc_test_") + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("config text round trip") {
  for (const auto& info : list_scenarios())
    for (const ScenarioConfig& c : builtin_variants(info.name, "/data")) {
      const ScenarioConfig back = parse_config(to_text(c));
      CHECK(to_text(back) == to_text(c));
    }
  ScenarioConfig c;
  c.seed = 99;
  c.mu0 = 0.0125;
  c.sources = {{-0.6, 0, 0}, {0.1, -0.7, 0.05}};
  c.guard_arm_s = 1.25;
  c.metric_end_s = 9.5;
  HeadTrajectory h;
  h.amplitude_m = 0.03;
  h.axis = {0, 1, 0};
  h.start_s = 2;
  c.head = h;
  const ScenarioConfig back = parse_config(to_text(c));
  CHECK(back.seed == 99);
  CHECK(back.mu0 == 0.0125);
  CHECK(back.sources.size() == 2);
  CHECK(back.sources[1] == Position3{0.1, -0.7, 0.05});
  CHECK(*back.guard_arm_s == 1.25);
  CHECK(*back.metric_end_s == 9.5);
  REQUIRE(back.head);
  CHECK(back.head->axis == Position3{0, 1, 0});
  CHECK(back.head->start_s == 2.0);
}

TEST_CASE("config parsing errors name the key") {
  CHECK_THROWS_WITH_AS(parse_config("controller.bogus = 3"), doctest::Contains("controller.bogus"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("controller.mu0 = fast"), doctest::Contains("controller.mu0"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign here"), ConfigError);

  const fs::path dir = fresh_dir("configs");
  fs::create_directories(dir);
  std::ofstream(dir / "short.cfg") << "duration_s = 0.5\n";
  CHECK_THROWS_WITH_AS(load_config(dir / "short.cfg"), doctest::Contains("duration_s"), ConfigError);
  std::ofstream(dir / "wav.cfg") << "source.kind = wav\nsource.wav = missing.wav\n";
  CHECK_THROWS_WITH_AS(load_config(dir / "wav.cfg"), doctest::Contains("source.wav"), ConfigError);
  Signal tone{oracle::sine(16000, 16000, 440, 0.5), 16000};
  save_wav(dir / "present.wav", tone, WavEncoding::pcm16);
  std::ofstream(dir / "wav2.cfg") << "source.kind = wav\nsource.wav = present.wav\n";
  CHECK(load_config(dir / "wav2.cfg").source_wav == dir / "present.wav");
  CHECK_THROWS_AS(load_config(dir / "absent.cfg"), ConfigError);
  const ScenarioConfig c = parse_config("# comment\nseed = 5  # trailing\n\nmembrane.location = lobule\n");
  CHECK(c.seed == 5);
  CHECK(c.membrane_location == MembraneLocation::lobule);
}

TEST_CASE("config keys are unique and documented") {
  const auto& keys = config_keys();
  CHECK(keys.size() > 40);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    CHECK_FALSE(keys[i].help.empty());
    for (std::size_t j = i + 1; j < keys.size(); ++j) CHECK(keys[i].key != keys[j].key);
  }
}

TEST_CASE("built-in scenario table") {
  const auto& s = list_scenarios();
  const std::vector<std::string> names = {"fig4a", "fig4b", "fig4c", "fig3-placement",
                                          "table1-env", "fig7-motion", "fig7-dropout"};
  REQUIRE(s.size() == names.size());
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(s[i].name == names[i]);
  CHECK(s[3].variants.size() == 4);
  CHECK(s[4].variants.size() == 3);
  std::vector<MembraneLocation> locs;
  for (const auto& c : builtin_variants("fig3-placement")) locs.push_back(c.membrane_location);
  CHECK(locs == std::vector<MembraneLocation>{MembraneLocation::anterior_notch, MembraneLocation::tragus,
                                              MembraneLocation::cavum_concha, MembraneLocation::lobule});
  CHECK(is_builtin("fig4a-right"));
  CHECK_FALSE(is_builtin("fig9"));
  CHECK_THROWS_AS(builtin_variants("fig9"), ConfigError);
  const auto flyby = builtin_variants("table1-env-aircraft_flyby", "/x").front();
  CHECK(flyby.metric_start_s == 3.0);
  CHECK(*flyby.metric_end_s == 8.0);
  CHECK(flyby.source_wav == fs::path("/x/aircraft_flyby.wav"));
}

TEST_CASE("CI profile scales time settings") {
  const ScenarioConfig c = ci("fig7-dropout");
  CHECK(c.sample_rate == 16000);
  CHECK(c.control_taps == 256);
  CHECK(c.secondary_taps == 256);
  CHECK(c.duration_s == 4.0);
  CHECK(c.metric_start_s == doctest::Approx(5.0 * 4 / 15));
  CHECK(c.head->start_s == doctest::Approx(c.metric_start_s));
  const ScenarioConfig w = with_duration(builtin_variants("table1-env-aircraft_flyby").front(), 7.5);
  CHECK(w.metric_start_s == doctest::Approx(1.5));
  CHECK(*w.metric_end_s == doctest::Approx(4.0));
}

TEST_CASE("ANC disabled leaves both passes identical") {
  ScenarioConfig c = ci("fig4a-left");
  c.anc_enabled = false;
  c.expect_min_attenuation_db.reset();
  c.expect_min_band_attenuation_eardrum_db.reset();
  c.expect_min_band_attenuation_membrane_db.reset();
  c.duration_s = 2.0;
  c.metric_start_s = 0.5;
  const RunReport r = run_scenario(c);
  CHECK(r.eardrum_on.samples == r.eardrum_off.samples);
  CHECK(r.attenuation_db == 0.0);
  CHECK(r.spl_on_db == r.spl_off_db);
  CHECK(r.failures.empty());
}

TEST_CASE("ANC-off eardrum pressure is the delayed sum of primary paths") {
  ScenarioConfig c = ci("fig4b-left");
  c.anc_enabled = false;
  c.duration_s = 1.5;
  c.metric_start_s = 0.5;
  const RunReport r = run_scenario(c);
  const SceneGeometry g = SceneGeometry::headrest(c.ear, c.membrane_location, c.sources);
  const ScenePaths paths = scene_paths(g, {}, c.sample_rate, 512);
  const std::size_t n = r.source.samples.size();
  const std::size_t d = paths.coupling.reference_delay;
  std::vector<double> expected(n, 0.0);
  for (const PathFIR& p : paths.primary) {
    const auto y = oracle::convolve(r.source.samples, p.taps, n);
    for (std::size_t i = d; i < n; ++i) expected[i] += y[i - d];
  }
  REQUIRE(r.eardrum_off.samples.size() == n);
  const double scale = std::sqrt(oracle::mean_square(expected));
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(r.eardrum_off.samples[i] - expected[i]));
  CHECK(worst <= 1e-9 * scale);
  CHECK(r.spl_off_db == doctest::Approx(c.target_spl_db).epsilon(1e-6));
}

TEST_CASE("fig4a CI run: attenuation, bands and spectra") {
  const RunReport& r = fig4a_ci();
  CHECK(r.failures.empty());
  CHECK(r.attenuation_db == r.spl_off_db - r.spl_on_db);
  CHECK(r.attenuation_db >= 10.0);
  for (const BandMetric& b : r.membrane_bands) CHECK(b.attenuation_db >= 15.0);
  for (const BandMetric& b : r.eardrum_bands) CHECK(b.attenuation_db >= 10.0);
  REQUIRE(r.spectrum_on.level_db.size() == r.spectrum_off.level_db.size());
  for (std::size_t k = 0; k < r.spectrum_on.level_db.size(); ++k)
    CHECK(r.spectrum_on.level_db[k] <= r.spectrum_off.level_db[k]);
  CHECK_FALSE(r.guard.tripped);
}

TEST_CASE("reports are consistent and reproducible byte for byte") {
  const RunReport& r = fig4a_ci();
  const fs::path a = fresh_dir("report_a"), b = fresh_dir("report_b");
  emit_report(r, a);
  emit_report(run_scenario(ci("fig4a-left")), b);
  for (const char* f : {"metrics.csv", "bands.csv", "spectrum_off.csv", "spectrum_on.csv",
                        "timeseries.csv", "coefficients.csv", "config.txt", "README.md"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK_FALSE(fs::exists(a / "tracker.csv"));

  // attenuation row equals the difference of the SPL rows as written.
  std::ifstream m(a / "metrics.csv");
  std::string line;
  std::getline(m, line);
  CHECK(line == "metric,value");
  double off = 0, on = 0, att = 0;
  while (std::getline(m, line)) {
    const auto comma = line.find(',');
    const std::string k = line.substr(0, comma);
    const double v = std::stod(line.substr(comma + 1));
    if (k == "spl_off_db") off = v;
    if (k == "spl_on_db") on = v;
    if (k == "attenuation_db") att = v;
  }
  CHECK(att == doctest::Approx(off - on).epsilon(1e-9));

  std::ifstream s(a / "spectrum_on.csv");
  std::getline(s, line);
  CHECK(line == "freq_hz,level_db");
  std::ifstream t(a / "timeseries.csv");
  std::getline(t, line);
  CHECK(line == "t_s,p_off_pa,p_on_pa");
}

TEST_CASE("report errors carry the path") {
  const fs::path blocker = fresh_dir("blocker");
  std::ofstream(blocker) << "file, not a directory";
  CHECK_THROWS_WITH(emit_report(fig4a_ci(), blocker / "sub"), doctest::Contains("blocker"));
}

TEST_CASE("tracking run writes the tracker log") {
  ScenarioConfig c = ci("fig7-motion");
  c.duration_s = 1.0;
  c.metric_start_s = 0.5;
  c.dump_frames = 2;
  const RunReport r = run_scenario(c);
  CHECK(r.tracker_log.size() == 30);
  CHECK(r.beam.frames_on_membrane == r.beam.frames);
  CHECK(r.frames.size() == 2);
  const fs::path d = fresh_dir("tracker");
  emit_report(r, d);
  std::ifstream in(d / "tracker.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "frame_index,centroid_x_px,centroid_y_px,beam_x_m,beam_y_m,lost_flag");
  CHECK(fs::exists(d / "frame_0000.pgm"));
  CHECK(fs::exists(d / "frame_0001.pgm"));
}

TEST_CASE("identification preamble reaches the exact secondary path") {
  ScenarioConfig c = ci("fig4a-left");
  c.secondary_path = SecondaryPathMode::identified;
  const IdentificationReport r = run_identification(c);
  REQUIRE(r.misalignment_db);
  CHECK(*r.misalignment_db <= -30.0);
  CHECK(r.estimate.taps.size() == c.secondary_taps);
}
