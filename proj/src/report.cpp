#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "vanc/runner.hpp"

namespace vanc {

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  std::ofstream& stream() { return out_; }
  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_number(v);
}

void write_spectrum(const std::filesystem::path& path, const Spectrum& s) {
  CsvFile f(path, "freq_hz,level_db");
  for (std::size_t i = 0; i < s.freqs.size(); ++i)
    f.stream() << num(s.freqs[i]) << ',' << num(s.level_db[i]) << '\n';
  f.close();
}

constexpr const char* kReadme = R"(# Run artifacts

All CSV files are UTF-8 with a header row; numbers use up to 10
significant digits. Pressures are in Pa, levels in dB re 20 uPa.

- `config.txt`: the complete scenario configuration, including the seed.
  Feeding it back to `vanc run` reproduces these files byte for byte.
- `metrics.csv` (`metric,value`): overall results over the metric window.
  - `spl_off_db`, `spl_on_db`: eardrum SPL without and with ANC, band limited
    to `band.lo_hz`..`band.hi_hz`; `attenuation_db` is their difference.
  - `membrane_*`: the same at the membrane pick-up.
  - `min_band_attenuation_*_db`: worst third-octave band.
  - `source_gain`: scale applied to the source to hit the target ANC-off level.
  - `id_misalignment_db`: secondary-path identification error (nan when the
    exact estimate was used).
  - `guard_*`: divergence guard state of the ANC-on pass; trip time in s.
  - `beam_*`: frames simulated, frames with the beam inside the membrane
    radius, largest beam-to-centre distance (m), first LDV dropout time (s).
  - `tracker_lost_frames`: frames where the camera saw no marker.
  - `expectation_failures`: number of unmet `expect.*` settings.
- `bands.csv`: third-octave band levels (`band_lo_hz,band_hi_hz,
  eardrum_off_db,eardrum_on_db,eardrum_attenuation_db,membrane_off_db,
  membrane_on_db,membrane_attenuation_db`).
- `spectrum_off.csv`, `spectrum_on.csv` (`freq_hz,level_db`): averaged eardrum
  spectra over the metric window, per-bin levels.
- `timeseries.csv` (`t_s,p_off_pa,p_on_pa`): eardrum pressure, full run.
- `coefficients.csv` (`index,value`): final control filter of the ANC-on pass.
- `tracker.csv` (`frame_index,centroid_x_px,centroid_y_px,beam_x_m,beam_y_m,
  lost_flag`): only when tracking ran. Centroid fields are empty on frames
  where the marker was lost; beam coordinates are the target applied to
  that frame in the tracking plane (x forward, y up).
- `frame_NNNN.pgm`: camera frames, when `tracking.dump_frames` is set.
)";

}  // namespace

void emit_report(const RunReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  {
    std::ofstream f(dir / "config.txt", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / "config.txt").string());
    f << to_text(r.config);
  }
  {
    std::ofstream f(dir / "README.md", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / "README.md").string());
    f << kReadme;
  }

  CsvFile metrics(dir / "metrics.csv", "metric,value");
  for (const auto& [k, v] : r.metrics()) metrics.stream() << k << ',' << num(v) << '\n';
  metrics.close();

  CsvFile bands(dir / "bands.csv",
                "band_lo_hz,band_hi_hz,eardrum_off_db,eardrum_on_db,eardrum_attenuation_db,"
                "membrane_off_db,membrane_on_db,membrane_attenuation_db");
  for (std::size_t i = 0; i < r.eardrum_bands.size(); ++i) {
    const BandMetric& e = r.eardrum_bands[i];
    const BandMetric& m = r.membrane_bands[i];
    bands.stream() << num(e.band.lo) << ',' << num(e.band.hi) << ',' << num(e.off_db) << ','
                   << num(e.on_db) << ',' << num(e.attenuation_db) << ',' << num(m.off_db) << ','
                   << num(m.on_db) << ',' << num(m.attenuation_db) << '\n';
  }
  bands.close();

  write_spectrum(dir / "spectrum_off.csv", r.spectrum_off);
  write_spectrum(dir / "spectrum_on.csv", r.spectrum_on);

  CsvFile ts(dir / "timeseries.csv", "t_s,p_off_pa,p_on_pa");
  const double fs = r.eardrum_off.sample_rate;
  for (std::size_t n = 0; n < r.eardrum_off.samples.size(); ++n)
    ts.stream() << num(n / fs) << ',' << num(r.eardrum_off.samples[n]) << ','
                << num(r.eardrum_on.samples[n]) << '\n';
  ts.close();

  CsvFile coef(dir / "coefficients.csv", "index,value");
  for (std::size_t i = 0; i < r.coefficients.size(); ++i)
    coef.stream() << i << ',' << num(r.coefficients[i]) << '\n';
  coef.close();

  if (r.config.tracking_enabled) {
    CsvFile tr(dir / "tracker.csv",
               "frame_index,centroid_x_px,centroid_y_px,beam_x_m,beam_y_m,lost_flag");
    for (const TrackerLogRow& row : r.tracker_log) {
      tr.stream() << row.frame << ',';
      if (row.centroid) tr.stream() << num(row.centroid->x) << ',' << num(row.centroid->y);
      else tr.stream() << ',';
      tr.stream() << ',' << num(row.beam.u) << ',' << num(row.beam.v) << ','
                  << (row.lost ? 1 : 0) << '\n';
    }
    tr.close();
  }

  for (std::size_t i = 0; i < r.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.pgm", i);
    write_pgm(dir / name, r.frames[i]);
  }
}

}  // namespace vanc
