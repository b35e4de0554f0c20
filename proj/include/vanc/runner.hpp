#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vanc/config.hpp"
#include "vanc/scene.hpp"
#include "vanc/signal.hpp"
#include "vanc/tracking.hpp"

namespace vanc {

struct BandMetric {
  Band band;
  double off_db = 0;
  double on_db = 0;
  double attenuation_db = 0;
};

struct TrackerLogRow {
  std::size_t frame = 0;
  std::optional<PixelCoord> centroid;  // empty when the marker was lost
  Vec2 beam;                           // applied beam target, m
  bool lost = false;
};

struct GuardReport {
  bool enabled = false;
  bool tripped = false;
  std::optional<double> trip_time_s;
  double baseline_power = 0;
};

struct BeamReport {
  std::size_t frames = 0;
  std::size_t lost_frames = 0;        // tracker saw no marker
  std::size_t frames_on_membrane = 0;
  double max_offset_m = 0;            // beam to membrane centre
  std::optional<double> first_loss_s; // first LDV sample off the membrane
};

struct RunReport {
  ScenarioConfig config;
  Signal source;                     // calibrated common source signal
  Signal eardrum_off, eardrum_on;    // Pa, full run
  Signal membrane_off, membrane_on;  // Pa at the pick-up
  double metric_start_s = 0, metric_end_s = 0;

  double spl_off_db = 0, spl_on_db = 0, attenuation_db = 0;
  double membrane_spl_off_db = 0, membrane_spl_on_db = 0, membrane_attenuation_db = 0;
  Spectrum spectrum_off, spectrum_on;                    // eardrum
  Spectrum membrane_spectrum_off, membrane_spectrum_on;
  std::vector<BandMetric> eardrum_bands, membrane_bands;  // third octaves

  double source_gain = 1;  // calibration scale applied to the source
  std::optional<double> id_misalignment_db;
  GuardReport guard;
  BeamReport beam;
  std::vector<TrackerLogRow> tracker_log;
  std::vector<FrameImage> frames;  // first tracking.dump_frames frames
  std::vector<double> coefficients;
  std::vector<std::string> failures;  // unmet expect.* settings

  /// (metric, value) rows in report order.
  std::vector<std::pair<std::string, double>> metrics() const;
};

/// Runs the ANC-off and ANC-on passes with shared seeds and computes the
/// metrics. Throws ConfigError, IdentificationError or ContractError.
RunReport run_scenario(const ScenarioConfig& config);

struct IdentificationReport {
  PathFIR estimate;
  PathFIR truth;  // exact estimate the controller would otherwise use
  std::optional<double> misalignment_db;
};

/// Runs only the secondary-path identification preamble.
IdentificationReport run_identification(const ScenarioConfig& config);

/// incidence_gain * (speaker-to-membrane path * membrane response), cut or
/// zero-padded to `taps`.
PathFIR exact_secondary_estimate(const Scene& scene, const PathFIR& membrane,
                                 double incidence_deg, std::size_t taps);

/// Per-band levels of two spectra over the third octaves of `range`.
std::vector<BandMetric> band_metrics(const Spectrum& off, const Spectrum& on, Band range);

/// Writes metrics.csv, bands.csv, spectrum_off.csv, spectrum_on.csv,
/// timeseries.csv, coefficients.csv, config.txt, README.md and, when tracking
/// ran, tracker.csv (plus optional frame PGMs). Throws std::runtime_error
/// with the failing path.
void emit_report(const RunReport& report, const std::filesystem::path& out_dir);

}  // namespace vanc
