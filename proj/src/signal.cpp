#include "vanc/signal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "fft.hpp"
#include "vanc/dsp.hpp"
#include "vanc/errors.hpp"

namespace vanc {

void Signal::validate() const {
  if (sample_rate <= 0) throw DomainError("sample rate must be positive");
  for (double v : samples)
    if (!std::isfinite(v)) throw DomainError("signal contains non-finite samples");
}

Signal Signal::slice(double t0_s, double t1_s) const {
  const auto n = static_cast<long>(samples.size());
  const long a = std::clamp(std::lround(t0_s * sample_rate), 0L, n);
  const long b = std::clamp(std::lround(t1_s * sample_rate), a, n);
  return {{samples.begin() + a, samples.begin() + b}, sample_rate};
}

void Band::validate(int sample_rate) const {
  if (!(lo > 0 && lo < hi && hi < sample_rate / 2.0))
    throw DomainError("invalid band [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "] Hz for rate " +
                      std::to_string(sample_rate));
}

double Band::center() const { return std::sqrt(lo * hi); }

namespace {

// Inverse 40-phon equal-loudness shape, dB relative to 1 kHz, at nominal
// third-octave centers. Interpolated linearly in log-frequency, held flat
// beyond the ends.
struct ShapePoint {
  double f;
  double db;
};
constexpr std::array<ShapePoint, 15> kShapeTable{{
    {315, 6.0},
    {400, 4.5},
    {500, 3.5},
    {630, 2.5},
    {800, 1.2},
    {1000, 0.0},
    {1250, 0.3},
    {1600, 0.5},
    {2000, -0.5},
    {2500, -2.5},
    {3150, -4.0},
    {4000, -4.0},
    {5000, -2.0},
    {6300, 1.5},
    {8000, 6.0},
}};

double shape_db(double f) {
  if (f <= kShapeTable.front().f) return kShapeTable.front().db;
  if (f >= kShapeTable.back().f) return kShapeTable.back().db;
  for (std::size_t i = 1; i < kShapeTable.size(); ++i) {
    const auto& a = kShapeTable[i - 1];
    const auto& b = kShapeTable[i];
    if (f <= b.f) {
      const double t = std::log(f / a.f) / std::log(b.f / a.f);
      return a.db + t * (b.db - a.db);
    }
  }
  return kShapeTable.back().db;
}

void apply_sos(std::vector<Biquad> sos, std::vector<double>& x) {
  for (auto& bq : sos) {
    bq.reset();
    for (double& v : x) v = bq.process(v);
  }
}

}  // namespace

double shaping_gain(double f_hz, int sample_rate) {
  if (!(f_hz > 0 && f_hz < sample_rate / 2.0))
    throw DomainError("shaping_gain: frequency outside (0, Nyquist)");
  return std::pow(10.0, shape_db(f_hz) / 20.0);
}

Signal generate_white_noise(double duration_s, int sample_rate, double rms_value,
                            std::uint64_t seed) {
  if (!(duration_s > 0) || sample_rate <= 0)
    throw DomainError("noise duration and rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  Rng rng(seed);
  Signal s{std::vector<double>(n), sample_rate};
  for (double& v : s.samples) v = rms_value * rng.gaussian();
  return s;
}

Signal generate_grey_noise(double duration_s, int sample_rate, Band band,
                           double target_spl_db, std::uint64_t seed) {
  if (!(duration_s > 0)) throw DomainError("grey noise duration must be positive");
  band.validate(sample_rate);
  Signal s = generate_white_noise(duration_s, sample_rate, 1.0, seed);
  const std::size_t n = s.samples.size();
  if (n < 4) throw DomainError("grey noise duration too short");

  detail::RealFft fft(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fft.forward(s.samples, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / n;
    spec[k] *= (f >= band.lo && f <= band.hi) ? shaping_gain(f, sample_rate) : 0.0;
  }
  fft.inverse(spec, s.samples);

  // The inverse transform is unnormalized; calibration absorbs the factor n.
  // overall_spl scales exactly with amplitude, so one correction suffices.
  const double level = overall_spl(s, band);
  const double scale = std::pow(10.0, (target_spl_db - level) / 20.0);
  for (double& v : s.samples) v *= scale;
  return s;
}

std::vector<double> band_filter(const Signal& signal, Band band) {
  band.validate(signal.sample_rate);
  const auto& x = signal.samples;
  const std::size_t n = x.size();
  if (n == 0) return {};
  const double fs = signal.sample_rate;
  std::vector<Biquad> sos = butterworth_highpass(4, band.lo, fs);
  for (const auto& bq : butterworth_lowpass(4, band.hi, fs)) sos.push_back(bq);

  // Odd extension at both ends suppresses start-up transients.
  const std::size_t pad = std::min<std::size_t>(
      n - 1, static_cast<std::size_t>(std::ceil(8.0 * fs / band.lo)));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2 * x[n - 1] - x[n - 1 - i]);

  apply_sos(sos, ext);
  std::reverse(ext.begin(), ext.end());
  apply_sos(sos, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + pad, ext.begin() + pad + n};
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::sqrt(dot(x, x) / x.size());
}

double level_db(double rms_value, double reference) {
  if (rms_value <= 0) return kSilentLevel;
  return 20.0 * std::log10(rms_value / reference);
}

double overall_level(const Signal& signal, Band band, double reference) {
  return level_db(rms(band_filter(signal, band)), reference);
}

double overall_spl(const Signal& signal, Band band) {
  return overall_level(signal, band, kReferencePressure);
}

Spectrum averaged_spectrum(const Signal& signal, double segment_s, Band band,
                           double reference) {
  band.validate(signal.sample_rate);
  const auto seg = static_cast<std::size_t>(std::lround(segment_s * signal.sample_rate));
  if (seg < 8) throw DomainError("spectrum segment too short");
  if (signal.samples.size() < seg)
    throw DomainError("signal shorter than one spectrum segment");

  std::vector<double> window(seg);
  for (std::size_t i = 0; i < seg; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / seg);
  const double sum_w = std::accumulate(window.begin(), window.end(), 0.0);
  const double sum_w2 = dot(window, window);

  detail::RealFft fft(seg);
  const std::size_t hop = seg / 2;
  const std::size_t count = (signal.samples.size() - seg) / hop + 1;
  std::vector<double> power(seg / 2 + 1, 0.0);
  std::vector<double> frame(seg);
  std::vector<std::complex<double>> spec(seg / 2 + 1);
  for (std::size_t s = 0; s < count; ++s) {
    const double* src = signal.samples.data() + s * hop;
    for (std::size_t i = 0; i < seg; ++i) frame[i] = src[i] * window[i];
    fft.forward(frame, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) power[k] += std::norm(spec[k]);
  }

  Spectrum out;
  out.bin_width = static_cast<double>(signal.sample_rate) / seg;
  out.enbw_bins = seg * sum_w2 / (sum_w * sum_w);
  out.reference = reference;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double f = k * out.bin_width;
    if (f < band.lo || f > band.hi) continue;
    const double one_sided = (k == 0 || 2 * k == seg) ? 1.0 : 2.0;
    const double p = one_sided * power[k] / count / (sum_w * sum_w);
    out.freqs.push_back(f);
    out.level_db.push_back(p > 0 ? 10.0 * std::log10(p / (reference * reference))
                                 : kSilentLevel);
  }
  return out;
}

double band_level(const Spectrum& spectrum, Band band) {
  double total = 0;
  const double ref2 = spectrum.reference * spectrum.reference;
  for (std::size_t i = 0; i < spectrum.freqs.size(); ++i) {
    const double f = spectrum.freqs[i];
    if (f < band.lo || f > band.hi || is_silent(spectrum.level_db[i])) continue;
    total += ref2 * std::pow(10.0, spectrum.level_db[i] / 10.0);
  }
  total /= spectrum.enbw_bins;
  return level_db(std::sqrt(total), spectrum.reference);
}

double attenuation(double spl_before, double spl_after) {
  return spl_before - spl_after;
}

std::vector<Band> third_octave_bands(Band range) {
  std::vector<Band> bands;
  for (int k = -20; k <= 13; ++k) {
    const double fc = 1000.0 * std::pow(2.0, k / 3.0);
    const double lo = fc * std::pow(2.0, -1.0 / 6.0);
    const double hi = fc * std::pow(2.0, 1.0 / 6.0);
    if (hi <= range.lo || lo >= range.hi) continue;
    bands.push_back({std::max(lo, range.lo), std::min(hi, range.hi)});
  }
  return bands;
}

Signal resample_linear(const Signal& signal, int new_rate) {
  if (new_rate <= 0) throw DomainError("resample rate must be positive");
  if (signal.sample_rate <= 0) throw DomainError("source rate must be positive");
  const auto& x = signal.samples;
  if (x.empty()) return {{}, new_rate};
  const auto n_out = static_cast<std::size_t>(
      std::floor((x.size() - 1) * static_cast<double>(new_rate) / signal.sample_rate)) + 1;
  Signal out{std::vector<double>(n_out), new_rate};
  const double step = static_cast<double>(signal.sample_rate) / new_rate;
  for (std::size_t i = 0; i < n_out; ++i) {
    const double pos = i * step;
    const auto j = static_cast<std::size_t>(pos);
    const double frac = pos - j;
    const double a = x[std::min(j, x.size() - 1)];
    const double b = x[std::min(j + 1, x.size() - 1)];
    out.samples[i] = a + frac * (b - a);
  }
  return out;
}

}  // namespace vanc
