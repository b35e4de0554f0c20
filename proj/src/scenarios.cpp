#include "vanc/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "vanc/errors.hpp"

namespace vanc {

namespace {

// Source placements on a horizontal circle around the head centre; azimuth
// measured from straight behind, positive towards the left.
Position3 behind(double distance_m, double azimuth_deg = 0) {
  const double a = azimuth_deg * std::numbers::pi / 180.0;
  return {-distance_m * std::cos(a), distance_m * std::sin(a), 0};
}

ScenarioConfig fig4(std::string name, std::vector<Position3> sources, Ear ear) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.ear = ear;
  c.sources = std::move(sources);
  c.target_spl_db = 77.7;
  c.expect_min_attenuation_db = 10.0;
  return c;
}

std::string ear_suffix(Ear e) { return std::string("-") + std::string(to_string(e)); }

struct Builtin {
  ScenarioInfo info;
  std::vector<ScenarioConfig> (*make)(const std::filesystem::path& data_dir);
};

std::vector<ScenarioConfig> make_fig4a(const std::filesystem::path&) {
  std::vector<ScenarioConfig> out;
  for (Ear e : {Ear::left, Ear::right}) {
    ScenarioConfig c = fig4("fig4a" + ear_suffix(e), {behind(0.6)}, e);
    c.description = "one grey-noise source 0.6 m behind";
    c.expect_min_band_attenuation_membrane_db = 15.0;
    c.expect_min_band_attenuation_eardrum_db = 10.0;
    out.push_back(c);
  }
  return out;
}

std::vector<ScenarioConfig> make_fig4b(const std::filesystem::path&) {
  std::vector<ScenarioConfig> out;
  for (Ear e : {Ear::left, Ear::right}) {
    ScenarioConfig c = fig4("fig4b" + ear_suffix(e), {behind(0.6), behind(0.8, 45)}, e);
    c.description = "two coherent sources: 0.6 m behind, 0.8 m left-rear";
    out.push_back(c);
  }
  return out;
}

std::vector<ScenarioConfig> make_fig4c(const std::filesystem::path&) {
  std::vector<ScenarioConfig> out;
  for (Ear e : {Ear::left, Ear::right}) {
    ScenarioConfig c = fig4("fig4c" + ear_suffix(e),
                            {behind(0.6), behind(0.8, 45), behind(0.8, -45), behind(1.0, 90)}, e);
    c.description = "four coherent sources: behind, left-rear, right-rear, left";
    out.push_back(c);
  }
  return out;
}

std::vector<ScenarioConfig> make_fig3(const std::filesystem::path&) {
  std::vector<ScenarioConfig> out;
  for (MembraneLocation loc : {MembraneLocation::anterior_notch, MembraneLocation::tragus,
                               MembraneLocation::cavum_concha, MembraneLocation::lobule}) {
    ScenarioConfig c = fig4("fig3-placement-" + std::string(to_string(loc)), {behind(0.6)},
                            Ear::left);
    c.description = "fig4a geometry, pick-up at the " + std::string(to_string(loc));
    c.membrane_location = loc;
    c.expect_min_attenuation_db.reset();
    out.push_back(c);
  }
  return out;
}

std::vector<ScenarioConfig> make_table1(const std::filesystem::path& data_dir) {
  struct Env {
    const char* name;
    std::string_view file;
    double spl;
    std::optional<std::pair<double, double>> window;
  };
  const Env envs[] = {{"aircraft_interior", kEnvironmentFiles[0], 74.7, std::nullopt},
                      {"aircraft_flyby", kEnvironmentFiles[1], 82.1, std::pair{3.0, 8.0}},
                      {"ambient_speech", kEnvironmentFiles[2], 75.5, std::nullopt}};
  std::vector<ScenarioConfig> out;
  for (const Env& env : envs) {
    ScenarioConfig c;
    c.name = std::string("table1-env-") + env.name;
    c.description = std::string(env.name) + " recording, 1.2 m behind, right ear";
    c.ear = Ear::right;
    c.sources = {behind(1.2)};
    c.source_kind = SourceKind::wav;
    c.source_wav = data_dir / std::string(env.file);
    c.target_spl_db = env.spl;
    c.secondary_path = SecondaryPathMode::identified;
    if (env.window) {
      c.metric_start_s = env.window->first;
      c.metric_end_s = env.window->second;
    }
    c.expect_min_attenuation_db = 10.0;
    out.push_back(c);
  }
  return out;
}

ScenarioConfig fig7_base(std::string name) {
  ScenarioConfig c = fig4(std::move(name), {behind(0.6)}, Ear::left);
  HeadTrajectory h;
  h.axis = {1, 0, 0};
  h.amplitude_m = 0.04;
  h.angular_rate = 1.0;
  c.head = h;
  return c;
}

std::vector<ScenarioConfig> make_fig7_motion(const std::filesystem::path&) {
  ScenarioConfig c = fig7_base("fig7-motion");
  c.description = "forward-backward head motion, camera tracking at 30 fps";
  c.tracking_enabled = true;
  c.expect_beam_on_membrane = true;
  return {c};
}

std::vector<ScenarioConfig> make_fig7_dropout(const std::filesystem::path&) {
  ScenarioConfig c = fig7_base("fig7-dropout");
  c.description = "head motion after convergence with tracking disabled";
  c.head->start_s = c.metric_start_s;
  c.tracking_enabled = false;
  c.guard_freeze = false;
  c.expect_min_attenuation_db.reset();
  c.expect_guard_trip = true;
  c.expect_anc_worse = true;
  return {c};
}

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> table = [] {
    std::vector<Builtin> t = {
        {{"fig4a", "single source 0.6 m behind, grey noise, both ears", {}}, make_fig4a},
        {{"fig4b", "two coherent sources, both ears", {}}, make_fig4b},
        {{"fig4c", "four coherent sources, both ears", {}}, make_fig4c},
        {{"fig3-placement", "pick-up location sweep on the fig4a geometry", {}}, make_fig3},
        {{"table1-env", "environmental recordings, right ear (needs --data)", {}}, make_table1},
        {{"fig7-motion", "head motion with camera beam tracking", {}}, make_fig7_motion},
        {{"fig7-dropout", "head motion without tracking; LDV dropout", {}}, make_fig7_dropout},
    };
    for (Builtin& b : t)
      for (const ScenarioConfig& c : b.make("data")) b.info.variants.push_back(c.name);
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<ScenarioInfo>& list_scenarios() {
  static const std::vector<ScenarioInfo> infos = [] {
    std::vector<ScenarioInfo> v;
    for (const Builtin& b : builtins()) v.push_back(b.info);
    return v;
  }();
  return infos;
}

bool is_builtin(std::string_view name) {
  for (const Builtin& b : builtins()) {
    if (b.info.name == name) return true;
    for (const std::string& v : b.info.variants)
      if (v == name) return true;
  }
  return false;
}

std::vector<ScenarioConfig> builtin_variants(std::string_view name,
                                             const std::filesystem::path& data_dir) {
  for (const Builtin& b : builtins()) {
    std::vector<ScenarioConfig> all = b.make(data_dir);
    if (b.info.name == name) return all;
    for (ScenarioConfig& c : all)
      if (c.name == name) return {std::move(c)};
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

}  // namespace vanc
