#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "fft.hpp"
#include "vanc/dsp.hpp"
#include "vanc/scenarios.hpp"

namespace vanc {

namespace {

constexpr int kRate = 44100;
constexpr double kLength_s = 15.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> shaped_noise(std::size_t n, std::uint64_t seed,
                                 const std::function<double(double)>& magnitude) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.gaussian();
  detail::RealFft fft(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fft.forward(x, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * kRate / n;
    spec[k] *= f > 0 ? magnitude(f) : 0.0;
  }
  fft.inverse(spec, x);
  return x;
}

double bump_db(double f, double center, double octaves, double gain_db) {
  const double d = std::log2(f / center) / octaves;
  return gain_db * std::exp(-d * d);
}

double from_db(double db) { return std::pow(10.0, db / 20.0); }

void normalize(std::vector<double>& x, double peak) {
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0)
    for (double& v : x) v *= peak / m;
}

Signal interior(std::uint64_t seed, std::size_t n) {
  // Broadband cabin rumble with a boundary-layer hump around 2-4 kHz and
  // weak engine tones.
  auto mag = [](double f) {
    const double tilt = -3.0 * std::log2(std::max(f, 100.0) / 1000.0);
    return from_db(tilt + bump_db(f, 2800.0, 0.7, 10.0)) * (f > 60 ? 1.0 : 0.0);
  };
  std::vector<double> x = shaped_noise(n, seed, mag);
  const double noise_rms = rms(x);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    x[i] += noise_rms * (0.3 * std::sin(kTwoPi * 1150.0 * t) + 0.2 * std::sin(kTwoPi * 2300.0 * t + 1.0));
  }
  normalize(x, 0.5);
  return {std::move(x), kRate};
}

Signal flyby(std::uint64_t seed, std::size_t n) {
  // Jet noise passing overhead: loudness peaks mid-recording, spectrum
  // centred at 1.5-4 kHz.
  auto mag = [](double f) {
    return from_db(bump_db(f, 2500.0, 1.2, 12.0) - 2.0 * std::log2(std::max(f, 100.0) / 1000.0)) *
           (f > 60 ? 1.0 : 0.0);
  };
  std::vector<double> x = shaped_noise(n, seed, mag);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    const double d = (t - 5.5) / 2.5;
    x[i] *= from_db(-15.0 + 15.0 * std::exp(-d * d));
  }
  normalize(x, 0.8);
  return {std::move(x), kRate};
}

std::array<Signal, 2> babble(std::uint64_t seed, std::size_t n) {
  // Several talkers: speech-shaped noise with syllable-rate modulation,
  // mixed with different weights into two channels.
  constexpr int kTalkers = 6;
  auto mag = [](double f) {
    return from_db(bump_db(f, 500.0, 1.0, 8.0) + bump_db(f, 2500.0, 0.8, 6.0) -
                   4.0 * std::log2(std::max(f, 200.0) / 1000.0)) *
           (f > 80 ? 1.0 : 0.0);
  };
  std::array<Signal, 2> ch{Signal{std::vector<double>(n), kRate}, Signal{std::vector<double>(n), kRate}};
  Rng rng(seed);
  for (int k = 0; k < kTalkers; ++k) {
    const std::vector<double> talker = shaped_noise(n, derive_seed(seed, k + 1), mag);
    const double rate = 3.0 + 2.0 * rng.uniform();
    const double phase = kTwoPi * rng.uniform();
    const double pan = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / kRate;
      const double env = std::pow(std::max(0.0, std::sin(kTwoPi * rate * t / 2 + phase)), 2.0);
      const double v = talker[i] * (0.2 + env);
      ch[0].samples[i] += v * pan;
      ch[1].samples[i] += v * (1 - pan);
    }
  }
  double m = 0;
  for (const Signal& c : ch)
    for (double v : c.samples) m = std::max(m, std::abs(v));
  for (Signal& c : ch)
    for (double& v : c.samples) v *= 0.5 / m;
  return ch;
}

}  // namespace

void synthesize_environment(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const auto n = static_cast<std::size_t>(kLength_s * kRate);
  save_wav(dir / kEnvironmentFiles[0], interior(derive_seed(seed, 1), n), WavEncoding::pcm16);
  save_wav(dir / kEnvironmentFiles[1], flyby(derive_seed(seed, 2), n), WavEncoding::float32);
  const auto speech = babble(derive_seed(seed, 3), n);
  save_wav(dir / kEnvironmentFiles[2], std::span<const Signal>(speech), WavEncoding::pcm16);
}

}  // namespace vanc
