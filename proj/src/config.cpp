#include "vanc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vanc/errors.hpp"

namespace vanc {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError(std::string(key) + ": " + std::string(why) + " (got '" +
                    std::string(value) + "')");
}

double to_double(std::string_view key, std::string_view s) {
  s = trim(s);
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    bad(key, s, "expected a number");
  return v;
}

long long to_int(std::string_view key, std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad(key, s, "expected an integer");
  return v;
}

std::size_t to_count(std::string_view key, std::string_view s) {
  const long long v = to_int(key, s);
  if (v < 0) bad(key, s, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool to_bool(std::string_view key, std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(key, s, "expected true or false");
}

Position3 to_position(std::string_view key, std::string_view s) {
  double c[3];
  int n = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    if (n == 3) bad(key, s, "expected x, y, z");
    c[n++] = to_double(key, s.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n != 3) bad(key, s, "expected x, y, z");
  return {c[0], c[1], c[2]};
}

std::string position_text(const Position3& p) {
  return format_number(p.x) + ", " + format_number(p.y) + ", " + format_number(p.z);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

template <class T>
std::string opt_text(const std::optional<T>& v) {
  return v ? format_number(*v) : std::string("none");
}

std::optional<double> to_opt_double(std::string_view key, std::string_view s) {
  if (trim(s) == "none") return std::nullopt;
  return to_double(key, s);
}

using Setter = std::function<void(ScenarioConfig&, std::string_view key, std::string_view value,
                                  const std::filesystem::path& base)>;
using Getter = std::function<std::string(const ScenarioConfig&)>;

struct Entry {
  std::string_view key;
  std::string_view help;
  Setter set;
  Getter get;
};

HeadTrajectory& head_of(ScenarioConfig& c) {
  if (!c.head) c.head.emplace();
  return *c.head;
}

#define NUM(field) \
  [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) { c.field = to_double(k, v); }, \
  [](const ScenarioConfig& c) { return format_number(c.field); }
#define COUNT(field) \
  [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) { c.field = to_count(k, v); }, \
  [](const ScenarioConfig& c) { return std::to_string(c.field); }
#define INT(field) \
  [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) { c.field = static_cast<int>(to_int(k, v)); }, \
  [](const ScenarioConfig& c) { return std::to_string(c.field); }
#define BOOL(field) \
  [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) { c.field = to_bool(k, v); }, \
  [](const ScenarioConfig& c) { return bool_text(c.field); }
#define OPTNUM(field) \
  [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) { c.field = to_opt_double(k, v); }, \
  [](const ScenarioConfig& c) { return opt_text(c.field); }
#define HEAD(field) \
  [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) { head_of(c).field = to_double(k, v); }, \
  [](const ScenarioConfig& c) { return format_number(c.head ? c.head->field : HeadTrajectory{}.field); }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"name", "scenario name", [](ScenarioConfig& c, auto, std::string_view v, const auto&) { c.name = std::string(trim(v)); },
       [](const ScenarioConfig& c) { return c.name; }},
      {"description", "free text", [](ScenarioConfig& c, auto, std::string_view v, const auto&) { c.description = std::string(trim(v)); },
       [](const ScenarioConfig& c) { return c.description; }},
      {"sample_rate", "audio rate, Hz", INT(sample_rate)},
      {"duration_s", "run length, s (>= 1)", NUM(duration_s)},
      {"seed", "master seed", [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) {
         c.seed = static_cast<std::uint64_t>(to_count(k, v)); },
       [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
      {"anc_enabled", "run the controller in the ANC-on pass", BOOL(anc_enabled)},
      {"ear", "left | right", [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) {
         try { c.ear = parse_ear(trim(v)); } catch (const DomainError&) { bad(k, v, "expected left or right"); } },
       [](const ScenarioConfig& c) { return std::string(to_string(c.ear)); }},
      {"membrane.location", "anterior_notch | tragus | cavum_concha | lobule",
       [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) {
         try { c.membrane_location = parse_membrane_location(trim(v)); } catch (const DomainError&) {
           bad(k, v, "unknown membrane location"); } },
       [](const ScenarioConfig& c) { return std::string(to_string(c.membrane_location)); }},
      {"geometry.sources", "primary source positions 'x, y, z; x, y, z', m, head frame",
       [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) {
         c.sources.clear();
         std::size_t start = 0;
         while (true) {
           const auto semi = v.find(';', start);
           c.sources.push_back(to_position(k, v.substr(start, semi - start)));
           if (semi == std::string_view::npos) break;
           start = semi + 1;
         } },
       [](const ScenarioConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.sources.size(); ++i) s += (i ? "; " : "") + position_text(c.sources[i]);
         return s; }},
      {"geometry.speaker_spacing_m", "headrest speaker spacing, m", NUM(speaker_spacing_m)},
      {"geometry.speaker_azimuth_deg", "speaker azimuth off the rear axis, degrees", NUM(speaker_azimuth_deg)},
      {"source.kind", "grey_noise | wav", [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) {
         const auto t = trim(v);
         if (t == "grey_noise") c.source_kind = SourceKind::grey_noise;
         else if (t == "wav") c.source_kind = SourceKind::wav;
         else bad(k, v, "expected grey_noise or wav"); },
       [](const ScenarioConfig& c) { return std::string(c.source_kind == SourceKind::wav ? "wav" : "grey_noise"); }},
      {"source.wav", "WAV file, relative to the config file",
       [](ScenarioConfig& c, auto, std::string_view v, const std::filesystem::path& base) {
         std::filesystem::path p{std::string(trim(v))};
         c.source_wav = p.is_relative() && !base.empty() ? base / p : p; },
       [](const ScenarioConfig& c) { return c.source_wav.string(); }},
      {"source.target_spl_db", "ANC-off eardrum SPL over the metric window, dB re 20 uPa", NUM(target_spl_db)},
      {"band.lo_hz", "analysis band lower edge, Hz", NUM(band.lo)},
      {"band.hi_hz", "analysis band upper edge, Hz", NUM(band.hi)},
      {"controller.taps", "control filter length L", COUNT(control_taps)},
      {"controller.secondary_taps", "secondary-path estimate length M", COUNT(secondary_taps)},
      {"controller.mu0", "step size (normalized) or mu (raw)", NUM(mu0)},
      {"controller.leakage", "coefficient leak per sample, [0, 1)", NUM(leakage)},
      {"controller.normalized", "normalize mu by the filtered-reference energy", BOOL(normalized)},
      {"controller.secondary_path", "exact | identified",
       [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) {
         const auto t = trim(v);
         if (t == "exact") c.secondary_path = SecondaryPathMode::exact;
         else if (t == "identified") c.secondary_path = SecondaryPathMode::identified;
         else bad(k, v, "expected exact or identified"); },
       [](const ScenarioConfig& c) {
         return std::string(c.secondary_path == SecondaryPathMode::exact ? "exact" : "identified"); }},
      {"identification.duration_s", "white-noise preamble length, s", NUM(id_duration_s)},
      {"identification.mu", "normalized identification step size", NUM(id_mu)},
      {"identification.excitation_rms", "speaker drive during the preamble", NUM(id_excitation_rms)},
      {"guard.enabled", "attach the divergence guard", BOOL(guard_enabled)},
      {"guard.window_s", "running-power window, s", NUM(guard_window_s)},
      {"guard.trip_ratio", "trip when power exceeds ratio x baseline", NUM(guard_trip_ratio)},
      {"guard.arm_s", "samples ignored before the baseline window, s (none = metric start - window)", OPTNUM(guard_arm_s)},
      {"guard.freeze", "freeze the controller on trip (false = monitor only)", BOOL(guard_freeze)},
      {"head.amplitude_m", "head motion amplitude, m (0 = stationary)",
       [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) {
         const double a = to_double(k, v);
         if (a == 0) c.head.reset();
         else head_of(c).amplitude_m = a; },
       [](const ScenarioConfig& c) { return format_number(c.head ? c.head->amplitude_m : 0.0); }},
      {"head.angular_rate", "rad/s", HEAD(angular_rate)},
      {"head.phase", "rad", HEAD(phase)},
      {"head.start_s", "motion onset, s", HEAD(start_s)},
      {"head.axis", "unit motion direction 'x, y, z'",
       [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) { head_of(c).axis = to_position(k, v); },
       [](const ScenarioConfig& c) { return position_text(c.head ? c.head->axis : HeadTrajectory{}.axis); }},
      {"tracking.enabled", "steer the beam from camera frames", BOOL(tracking_enabled)},
      {"tracking.frame_rate", "camera rate, frames/s", NUM(frame_rate)},
      {"tracking.latency_frames", "frames between capture and beam update", INT(latency_frames)},
      {"tracking.threshold", "binarization threshold, 1..255", INT(threshold)},
      {"tracking.mode", "absolute | velocity",
       [](ScenarioConfig& c, std::string_view k, std::string_view v, const auto&) {
         const auto t = trim(v);
         if (t == "absolute") c.tracker_mode = Tracker::Mode::absolute;
         else if (t == "velocity") c.tracker_mode = Tracker::Mode::velocity;
         else bad(k, v, "expected absolute or velocity"); },
       [](const ScenarioConfig& c) {
         return std::string(c.tracker_mode == Tracker::Mode::absolute ? "absolute" : "velocity"); }},
      {"tracking.marker_offset_m", "membrane centre above the marker, m", NUM(marker_offset_m)},
      {"tracking.dump_frames", "write PGM images of the first N frames", INT(dump_frames)},
      {"camera.width", "px", INT(camera.width)},
      {"camera.height", "px", INT(camera.height)},
      {"camera.distance_m", "camera to marker plane, m", NUM(camera.distance_m)},
      {"camera.ifov_rad", "angle subtended by one pixel, rad", NUM(camera.ifov_rad)},
      {"camera.marker_radius_m", "m", NUM(camera.marker_radius_m)},
      {"ldv.noise", "add the instrument noise floor", BOOL(ldv_noise)},
      {"ldv.noise_density", "m/s/sqrt(Hz)", NUM(ldv_noise_density)},
      {"ldv.dropout_db", "dropout noise above the floor, dB", NUM(ldv_dropout_db)},
      {"ldv.incidence_deg", "beam incidence on the membrane, degrees", NUM(ldv_incidence_deg)},
      {"metric.start_s", "metric window start (convergence exclusion), s", NUM(metric_start_s)},
      {"metric.end_s", "metric window end, s (none = end of run)", OPTNUM(metric_end_s)},
      {"metric.spectrum_segment_s", "Welch segment length, s", NUM(spectrum_segment_s)},
      {"expect.min_attenuation_db", "overall eardrum attenuation lower bound", OPTNUM(expect_min_attenuation_db)},
      {"expect.min_band_attenuation_eardrum_db", "per third-octave band, eardrum", OPTNUM(expect_min_band_attenuation_eardrum_db)},
      {"expect.min_band_attenuation_membrane_db", "per third-octave band, membrane", OPTNUM(expect_min_band_attenuation_membrane_db)},
      {"expect.guard_trip", "the guard is expected to trip", BOOL(expect_guard_trip)},
      {"expect.beam_on_membrane", "beam within the membrane radius on every frame", BOOL(expect_beam_on_membrane)},
      {"expect.anc_worse", "ANC-on SPL expected at or above ANC-off", BOOL(expect_anc_worse)},
  };
  return table;
}

#undef NUM
#undef COUNT
#undef INT
#undef BOOL
#undef OPTNUM
#undef HEAD

const Entry* find_entry(std::string_view key) {
  for (const auto& e : entries())
    if (e.key == key) return &e;
  return nullptr;
}

void require(bool ok, std::string_view key, const std::string& why) {
  if (!ok) throw ConfigError(std::string(key) + ": " + why);
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : entries()) k.push_back({e.key, e.help});
    return k;
  }();
  return keys;
}

void ScenarioConfig::validate() const {
  require(sample_rate >= 8000 && sample_rate <= 192000, "sample_rate", "must be in [8000, 192000]");
  require(duration_s >= 1.0, "duration_s", "must be at least 1 s");
  require(!sources.empty(), "geometry.sources", "at least one source required");
  require(speaker_spacing_m > 0, "geometry.speaker_spacing_m", "must be positive");
  require(target_spl_db > -50 && target_spl_db < 160, "source.target_spl_db", "out of range");
  try {
    band.validate(sample_rate);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("band: ") + e.what());
  }
  if (source_kind == SourceKind::wav) {
    require(!source_wav.empty(), "source.wav", "required for source.kind = wav");
    require(std::filesystem::is_regular_file(source_wav), "source.wav",
            "file not found: " + source_wav.string());
  }
  require(control_taps >= 1 && control_taps <= 65536, "controller.taps", "must be in [1, 65536]");
  require(secondary_taps >= 1 && secondary_taps <= 65536, "controller.secondary_taps",
          "must be in [1, 65536]");
  require(mu0 > 0, "controller.mu0", "must be positive");
  require(leakage >= 0 && leakage < 1, "controller.leakage", "must be in [0, 1)");
  require(id_duration_s > 0, "identification.duration_s", "must be positive");
  require(id_mu > 0 && id_mu < 2, "identification.mu", "must be in (0, 2)");
  require(id_excitation_rms > 0, "identification.excitation_rms", "must be positive");
  require(guard_window_s > 0, "guard.window_s", "must be positive");
  require(guard_trip_ratio > 1, "guard.trip_ratio", "must exceed 1");
  require(!guard_arm_s || *guard_arm_s >= 0, "guard.arm_s", "must be non-negative");
  if (head) {
    require(head->amplitude_m > 0, "head.amplitude_m", "must be positive");
    require(std::abs(head->axis.norm() - 1.0) < 1e-6, "head.axis", "must be a unit vector");
    require(head->start_s >= 0, "head.start_s", "must be non-negative");
  }
  require(frame_rate > 0 && frame_rate <= 1000, "tracking.frame_rate", "must be in (0, 1000]");
  require(latency_frames >= 0 && latency_frames <= 30, "tracking.latency_frames", "must be in [0, 30]");
  require(threshold >= 1 && threshold <= 255, "tracking.threshold", "must be in [1, 255]");
  require(camera.width >= 16 && camera.height >= 16, "camera.width", "frames must be at least 16x16");
  require(camera.distance_m > 0 && camera.ifov_rad > 0, "camera.distance_m", "must be positive");
  require(camera.marker_radius_m > 0, "camera.marker_radius_m", "must be positive");
  require(dump_frames >= 0, "tracking.dump_frames", "must be non-negative");
  require(ldv_noise_density >= 0, "ldv.noise_density", "must be non-negative");
  require(ldv_incidence_deg >= 0 && ldv_incidence_deg < 90, "ldv.incidence_deg", "must be in [0, 90)");
  require(metric_start_s >= 0, "metric.start_s", "must be non-negative");
  require(metric_end() <= duration_s, "metric.end_s", "beyond the end of the run");
  require(metric_end() - metric_start_s >= 0.5, "metric.end_s", "metric window shorter than 0.5 s");
  require(spectrum_segment_s > 0 && spectrum_segment_s <= metric_end() - metric_start_s,
          "metric.spectrum_segment_s", "must fit in the metric window");
}

ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const Entry* e = find_entry(key);
    if (!e) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    e->set(c, key, value, base_dir);
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ScenarioConfig c = parse_config(ss.str(), path.parent_path());
  c.validate();
  return c;
}

std::string to_text(const ScenarioConfig& config) {
  std::string out;
  for (const auto& e : entries()) {
    const std::string v = e.get(config);
    if (e.key.starts_with("head.") && e.key != "head.amplitude_m" && !config.head) continue;
    out += std::string(e.key) + " = " + v + "\n";
  }
  return out;
}

ScenarioConfig with_duration(ScenarioConfig c, double duration_s) {
  const double k = duration_s / c.duration_s;
  c.duration_s = duration_s;
  c.metric_start_s *= k;
  if (c.metric_end_s) *c.metric_end_s *= k;
  if (c.guard_arm_s) *c.guard_arm_s *= k;
  if (c.head) c.head->start_s *= k;
  c.spectrum_segment_s = std::min(c.spectrum_segment_s, c.metric_end() - c.metric_start_s);
  return c;
}

ScenarioConfig ci_profile(ScenarioConfig c) {
  c = with_duration(std::move(c), 4.0);
  c.sample_rate = 16000;
  c.control_taps = std::min<std::size_t>(c.control_taps, 256);
  c.secondary_taps = std::min<std::size_t>(c.secondary_taps, 256);
  return c;
}

}  // namespace vanc
