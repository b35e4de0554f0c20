#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

namespace vanc {

inline constexpr double kReferencePressure = 20e-6;  // Pa
inline constexpr double kReferenceVelocity = 1.0;    // m/s

/// Level returned for a silent signal or an empty band.
inline constexpr double kSilentLevel = -std::numeric_limits<double>::infinity();

inline bool is_silent(double level_db) { return level_db == kSilentLevel; }

/// Uniformly sampled stream (Pa or m/s).
struct Signal {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  /// Throws DomainError on a non-positive rate or non-finite sample.
  void validate() const;
  /// Samples in [t0, t1) seconds, clamped to the stream.
  Signal slice(double t0_s, double t1_s) const;
};

struct Band {
  double lo = 500.0;
  double hi = 6000.0;

  /// Requires 0 < lo < hi < sample_rate / 2.
  void validate(int sample_rate) const;
  double center() const;
};

struct Spectrum {
  std::vector<double> freqs;     // Hz, ascending
  std::vector<double> level_db;  // per-bin level; a tone reads its own level
  double bin_width = 0;          // Hz
  /// Equivalent noise bandwidth of the analysis window in bins. Summed bin
  /// powers divided by this equal the band power.
  double enbw_bins = 1;
  double reference = kReferencePressure;
};

/// Grey-noise spectral weighting (inverse equal-loudness shape), unity at
/// 1 kHz. Throws DomainError unless 0 < f < sample_rate / 2.
double shaping_gain(double f_hz, int sample_rate);

Signal generate_white_noise(double duration_s, int sample_rate, double rms,
                            std::uint64_t seed);

/// Gaussian noise shaped by shaping_gain inside `band`, zero outside, scaled
/// so overall_spl(result, band) == target_spl_db.
Signal generate_grey_noise(double duration_s, int sample_rate, Band band,
                           double target_spl_db, std::uint64_t seed);

/// Zero-phase (forward-backward) order-8 band-pass.
std::vector<double> band_filter(const Signal& signal, Band band);

double rms(std::span<const double> x);

/// 20 log10(rms / reference), or kSilentLevel when rms == 0.
double level_db(double rms_value, double reference);

/// Level of the band-filtered signal against `reference`.
double overall_level(const Signal& signal, Band band, double reference);

/// Band-limited sound pressure level, dB re 20 uPa.
double overall_spl(const Signal& signal, Band band);

/// Hann-windowed, 50 %-overlap averaged power spectrum restricted to `band`.
Spectrum averaged_spectrum(const Signal& signal, double segment_s, Band band,
                           double reference = kReferencePressure);

/// Level of the bins of `spectrum` inside `band` (ENBW corrected).
double band_level(const Spectrum& spectrum, Band band);

double attenuation(double spl_before, double spl_after);

/// Third-octave bands with nominal centers inside `range`, edges clipped to
/// the range.
std::vector<Band> third_octave_bands(Band range);

enum class WavEncoding { pcm16, float32 };

/// Reads PCM16 / float32 WAV, mono or stereo (channels averaged), mapped to
/// [-1, 1]. Throws FormatError on anything else.
Signal load_wav(const std::filesystem::path& path);

/// Writes `channels` (all equal length, same rate) as an interleaved WAV.
void save_wav(const std::filesystem::path& path,
              std::span<const Signal> channels, WavEncoding encoding);
void save_wav(const std::filesystem::path& path, const Signal& mono,
              WavEncoding encoding);

/// Linear-interpolation resampling.
Signal resample_linear(const Signal& signal, int new_rate);

}  // namespace vanc
