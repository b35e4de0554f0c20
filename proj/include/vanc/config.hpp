#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vanc/scene.hpp"
#include "vanc/signal.hpp"
#include "vanc/tracking.hpp"

namespace vanc {

enum class SourceKind { grey_noise, wav };
enum class SecondaryPathMode { exact, identified };

/// One single-ear scenario run. Every field maps to a dotted config key; see
/// config_keys() for the schema.
struct ScenarioConfig {
  std::string name = "custom";
  std::string description;
  int sample_rate = 32000;
  double duration_s = 15.0;
  std::uint64_t seed = 1;
  bool anc_enabled = true;

  Ear ear = Ear::left;
  MembraneLocation membrane_location = MembraneLocation::cavum_concha;
  std::vector<Position3> sources{{-0.6, 0, 0}};
  double speaker_spacing_m = 0.44;
  double speaker_azimuth_deg = 45.0;

  SourceKind source_kind = SourceKind::grey_noise;
  std::filesystem::path source_wav;
  double target_spl_db = 77.7;  // ANC-off eardrum level over the metric window
  Band band;

  std::size_t control_taps = 1024;    // L
  std::size_t secondary_taps = 1024;  // M
  double mu0 = 0.05;
  double leakage = 0.0;
  bool normalized = true;
  SecondaryPathMode secondary_path = SecondaryPathMode::exact;
  double id_duration_s = 2.0;
  double id_mu = 0.5;
  double id_excitation_rms = 1.0;

  bool guard_enabled = true;
  double guard_window_s = 0.25;
  double guard_trip_ratio = 100.0;
  std::optional<double> guard_arm_s;  // default: metric start minus one window
  bool guard_freeze = true;

  std::optional<HeadTrajectory> head;  // absent when amplitude is 0

  bool tracking_enabled = false;
  double frame_rate = 30.0;
  int latency_frames = 1;
  int threshold = 128;
  Tracker::Mode tracker_mode = Tracker::Mode::absolute;
  Camera camera;
  double marker_offset_m = 0.015;  // membrane centre above the marker
  int dump_frames = 0;             // PGM dumps of the first N frames

  bool ldv_noise = true;
  double ldv_noise_density = 20e-9;
  double ldv_dropout_db = 60.0;
  double ldv_incidence_deg = 0.0;

  double metric_start_s = 5.0;
  std::optional<double> metric_end_s;  // default: end of run
  double spectrum_segment_s = 0.128;  // 4096 samples at 32 kHz

  std::optional<double> expect_min_attenuation_db;
  std::optional<double> expect_min_band_attenuation_eardrum_db;
  std::optional<double> expect_min_band_attenuation_membrane_db;
  bool expect_guard_trip = false;
  bool expect_beam_on_membrane = false;
  bool expect_anc_worse = false;

  double metric_end() const { return metric_end_s.value_or(duration_s); }
  double guard_arm() const {
    return guard_arm_s.value_or(std::max(0.0, metric_start_s - guard_window_s));
  }
  /// Throws ConfigError with the offending key.
  void validate() const;
};

struct ConfigKey {
  std::string_view key;
  std::string_view help;
};
const std::vector<ConfigKey>& config_keys();

/// Parses `key = value` lines ('#' starts a comment). Relative WAV paths
/// resolve against `base_dir`. Unknown keys and malformed values throw
/// ConfigError. The result is not validated.
ScenarioConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir = {});
/// parse_config on the file contents, relative to its directory, then
/// validate().
ScenarioConfig load_config(const std::filesystem::path& path);

/// Full key/value echo; parse_config(to_text(c)) reproduces c.
std::string to_text(const ScenarioConfig& config);

/// Reduced profile: 16 kHz, 256 taps, 4 s, time parameters scaled with the
/// duration.
ScenarioConfig ci_profile(ScenarioConfig config);

/// Scales every time-valued setting by duration_s / current duration.
ScenarioConfig with_duration(ScenarioConfig config, double duration_s);

/// "%.10g" formatting used for all reports.
std::string format_number(double v);

}  // namespace vanc
