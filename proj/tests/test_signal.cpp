#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "oracles.hpp"
#include "vanc/errors.hpp"
#include "vanc/signal.hpp"

using namespace vanc;
namespace fs = std::filesystem;

namespace {

// Grey-noise weighting points (dB re 1 kHz) with log-frequency interpolation,
// restated here as the regression fixture.
double shaping_db_fixture(double f) {
  const double t[][2] = {{315, 6.0},   {400, 4.5},   {500, 3.5},   {630, 2.5},  {800, 1.2},
                         {1000, 0.0},  {1250, 0.3},  {1600, 0.5},  {2000, -0.5}, {2500, -2.5},
                         {3150, -4.0}, {4000, -4.0}, {5000, -2.0}, {6300, 1.5}, {8000, 6.0}};
  for (std::size_t i = 1; i < std::size(t); ++i)
    if (f <= t[i][0])
      return t[i - 1][1] +
             (t[i][1] - t[i - 1][1]) * std::log(f / t[i - 1][0]) / std::log(t[i][0] / t[i - 1][0]);
  return 6.0;
}

Signal tone(double seconds, int fs, double f, double amp) {
  return {oracle::sine(static_cast<std::size_t>(seconds * fs), fs, f, amp), fs};
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / (std::string("vanc_test_") + name);
}

void put16(std::ofstream& f, std::uint16_t v) { f.put(char(v & 0xff)).put(char(v >> 8)); }
void put32(std::ofstream& f, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) f.put(char((v >> (8 * i)) & 0xff));
}

// Hand-assembled RIFF/WAVE file.
void write_raw_wav(const fs::path& p, std::uint16_t format, std::uint16_t channels,
                   std::uint32_t rate, std::uint16_t bits, const std::vector<char>& data) {
  std::ofstream f(p, std::ios::binary);
  f.write("RIFF", 4);
  put32(f, 36 + static_cast<std::uint32_t>(data.size()));
  f.write("WAVEfmt ", 8);
  put32(f, 16);
  put16(f, format);
  put16(f, channels);
  put32(f, rate);
  put32(f, rate * channels * bits / 8);
  put16(f, channels * bits / 8);
  put16(f, bits);
  f.write("data", 4);
  put32(f, static_cast<std::uint32_t>(data.size()));
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
}

}  // namespace

TEST_CASE("shaping gain is unity at 1 kHz and follows the weighting table") {
  CHECK(shaping_gain(1000.0, 32000) == 1.0);
  const double g500 = shaping_gain(500.0, 32000);
  const double g6000 = shaping_gain(6000.0, 32000);
  CHECK(g500 > 0);
  CHECK(std::abs(20 * std::log10(g500)) <= 12.0);
  CHECK(std::abs(20 * std::log10(g6000)) <= 12.0);
  CHECK(g500 == doctest::Approx(std::pow(10.0, shaping_db_fixture(500) / 20)).epsilon(1e-12));
  CHECK(g6000 == doctest::Approx(std::pow(10.0, shaping_db_fixture(6000) / 20)).epsilon(1e-12));
  // Regression constants.
  CHECK(g500 == doctest::Approx(1.4962356560944334).epsilon(1e-12));
  CHECK(20 * std::log10(g6000) == doctest::Approx(0.7611).epsilon(1e-3));
}

TEST_CASE("shaping gain is positive and continuous across the band") {
  double prev = shaping_gain(300.0, 32000);
  for (double f = 301; f < 9000; f += 1.0) {
    const double g = shaping_gain(f, 32000);
    CHECK(g > 0);
    CHECK(std::abs(20 * std::log10(g / prev)) < 0.05);
    prev = g;
  }
}

TEST_CASE("shaping gain rejects frequencies outside (0, Nyquist)") {
  CHECK_THROWS_AS(shaping_gain(0.0, 32000), DomainError);
  CHECK_THROWS_AS(shaping_gain(-5.0, 32000), DomainError);
  CHECK_THROWS_AS(shaping_gain(16000.0, 32000), DomainError);
}

TEST_CASE("grey noise is calibrated, deterministic and band limited") {
  const Band band;
  const Signal a = generate_grey_noise(15.0, 32000, band, 77.7, 1);
  CHECK(a.samples.size() == 15u * 32000u);
  CHECK(overall_spl(a, band) == doctest::Approx(77.7).epsilon(0.1 / 77.7));
  const Signal b = generate_grey_noise(15.0, 32000, band, 77.7, 1);
  CHECK(a.samples == b.samples);
  const Signal c = generate_grey_noise(15.0, 32000, band, 77.7, 2);
  CHECK(a.samples != c.samples);

  const Signal s = generate_grey_noise(1.0, 32000, band, 77.7, 1);
  const double low = oracle::dft_band_power(s.samples, 32000, 0, 250);
  const double in = oracle::dft_band_power(s.samples, 32000, 500, 6000);
  CHECK(oracle::db10(in) - oracle::db10(std::max(low, 1e-300)) >= 40.0);
}

TEST_CASE("grey noise calibration round trip holds for any level and seed") {
  for (std::uint64_t seed : {3u, 17u, 99u})
    for (double level : {40.0, 74.7, 82.1, 110.0}) {
      const Signal s = generate_grey_noise(2.0, 16000, Band{500, 6000}, level, seed);
      CHECK(overall_spl(s, Band{}) == doctest::Approx(level).epsilon(0.1 / level));
    }
}

TEST_CASE("grey noise rejects invalid arguments") {
  CHECK_THROWS_AS(generate_grey_noise(0.0, 32000, Band{}, 70, 1), DomainError);
  CHECK_THROWS_AS(generate_grey_noise(1.0, 32000, Band{6000, 500}, 70, 1), DomainError);
  CHECK_THROWS_AS(generate_grey_noise(1.0, 10000, Band{500, 6000}, 70, 1), DomainError);
}

TEST_CASE("overall SPL of reference tones") {
  const Band band;
  const Signal ref = tone(2.0, 32000, 1000, 20e-6 * std::sqrt(2.0));
  CHECK(std::abs(overall_spl(ref, band)) <= 0.05);
  const Signal pa = tone(2.0, 32000, 1000, 1.0);
  const double expected = 20 * std::log10(std::sqrt(0.5) / 20e-6);
  CHECK(expected == doctest::Approx(90.97).epsilon(1e-4));
  CHECK(overall_spl(pa, band) == doctest::Approx(expected).epsilon(0.05 / expected));
  CHECK(is_silent(overall_spl(Signal{std::vector<double>(32000), 32000}, band)));
}

TEST_CASE("SPL changes by exactly 20 log10(g) under scaling") {
  const Signal s = generate_grey_noise(2.0, 32000, Band{}, 70.0, 5);
  const double base = overall_spl(s, Band{});
  for (double g : {0.001, 0.5, 3.0, 1000.0}) {
    Signal t = s;
    for (double& v : t.samples) v *= g;
    CHECK(std::abs(overall_spl(t, Band{}) - base - 20 * std::log10(g)) <= 0.01);
  }
}

TEST_CASE("attenuation arithmetic") {
  CHECK(std::abs(attenuation(74.7, 59.6) - 15.1) < 1e-9);
  CHECK(std::abs(attenuation(82.1, 61.6) - 20.5) < 1e-9);
  CHECK(std::abs(attenuation(75.5, 59.8) - 15.7) < 1e-9);
  CHECK(attenuation(63.2, 63.2) == 0.0);
  for (double a : {10.0, 55.5, 99.9})
    for (double b : {12.5, 70.0})
      CHECK(attenuation(a, b) == -attenuation(b, a));
}

TEST_CASE("averaged spectrum reads a tone at its own level") {
  const Signal s = tone(15.0, 32000, 1000, 1.0);
  const Spectrum sp = averaged_spectrum(s, 0.128, Band{});
  REQUIRE(sp.freqs.size() == sp.level_db.size());
  for (std::size_t i = 1; i < sp.freqs.size(); ++i) CHECK(sp.freqs[i] > sp.freqs[i - 1]);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < sp.level_db.size(); ++i)
    if (sp.level_db[i] > sp.level_db[peak]) peak = i;
  CHECK(std::abs(sp.freqs[peak] - 1000.0) <= sp.bin_width);
  CHECK(sp.level_db[peak] == doctest::Approx(90.97).epsilon(0.5 / 90.97));
}

TEST_CASE("averaged spectrum of white noise is flat") {
  const Signal s{oracle::white(15 * 32000, 11, 0.1), 32000};
  const Spectrum sp = averaged_spectrum(s, 0.128, Band{});
  double mean = 0;
  for (double l : sp.level_db) mean += l;
  mean /= static_cast<double>(sp.level_db.size());
  for (double l : sp.level_db) CHECK(std::abs(l - mean) <= 3.0);
}

TEST_CASE("averaged spectrum obeys Parseval within 1 %") {
  // Content strictly inside the band: time-domain power equals band power.
  const std::size_t n = 8 * 32000;
  std::vector<double> x(n, 0.0);
  const double freqs[] = {730.0, 1210.0, 2480.0, 3333.0, 5100.0};
  const double amps[] = {0.3, 1.0, 0.5, 0.8, 0.2};
  for (std::size_t k = 0; k < 5; ++k) {
    const auto t = oracle::sine(n, 32000, freqs[k], amps[k], 0.3 * k);
    for (std::size_t i = 0; i < n; ++i) x[i] += t[i];
  }
  const Signal s{x, 32000};
  const Spectrum sp = averaged_spectrum(s, 0.128, Band{});
  const double band_power = std::pow(10.0, band_level(sp, Band{}) / 10) * 20e-6 * 20e-6;
  CHECK(band_power == doctest::Approx(oracle::mean_square(x)).epsilon(0.01));

  const Signal noise{oracle::white(32000, 21), 32000};
  const Band wide{200, 15000};
  const Spectrum sn = averaged_spectrum(noise, 0.128, wide);
  const double direct = oracle::dft_band_power(noise.samples, 32000, 200, 15000);
  const double p = std::pow(10.0, band_level(sn, wide) / 10) * 20e-6 * 20e-6;
  CHECK(p == doctest::Approx(direct).epsilon(0.01));
}

TEST_CASE("averaged spectrum edge cases") {
  const Spectrum z = averaged_spectrum(Signal{std::vector<double>(32000), 32000}, 0.128, Band{});
  for (double l : z.level_db) CHECK(is_silent(l));
  CHECK_THROWS_AS(averaged_spectrum(Signal{std::vector<double>(100), 32000}, 0.128, Band{}),
                  DomainError);
}

TEST_CASE("third-octave bands tile the analysis band") {
  const auto bands = third_octave_bands(Band{});
  REQUIRE(!bands.empty());
  CHECK(bands.front().lo == 500.0);
  CHECK(bands.back().hi == 6000.0);
  for (std::size_t i = 1; i < bands.size(); ++i)
    CHECK(bands[i].lo == doctest::Approx(bands[i - 1].hi).epsilon(1e-12));
  CHECK(bands.size() == 12);
}

TEST_CASE("band and signal validation") {
  CHECK_THROWS_AS(Band({0, 100}).validate(32000), DomainError);
  CHECK_THROWS_AS(Band({600, 500}).validate(32000), DomainError);
  CHECK_THROWS_AS(Band({500, 16000}).validate(32000), DomainError);
  CHECK_NOTHROW(Band({500, 6000}).validate(16000));
  Signal bad{{0.0, std::numeric_limits<double>::quiet_NaN()}, 32000};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK_THROWS_AS(Signal({{0.0}, 0}).validate(), DomainError);
  const Signal s{std::vector<double>(32000, 1.0), 32000};
  CHECK(s.duration() == 1.0);
  CHECK(s.slice(0.25, 0.5).samples.size() == 8000);
  CHECK(s.slice(0.9, 3.0).samples.size() == 3200);
}

TEST_CASE("WAV full-scale PCM16 maps to +1") {
  const auto p = temp_file("full.wav");
  std::vector<char> data;
  for (int i = 0; i < 100; ++i) data.push_back(char(0xff)), data.push_back(char(0x7f));
  write_raw_wav(p, 1, 1, 32000, 16, data);
  const Signal s = load_wav(p);
  CHECK(s.sample_rate == 32000);
  REQUIRE(s.samples.size() == 100);
  for (double v : s.samples) CHECK(v == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("WAV stereo channels are averaged") {
  const auto p = temp_file("stereo.wav");
  std::vector<char> data;
  for (int i = 0; i < 50; ++i)
    for (float v : {0.5f, -0.5f}) {
      char b[4];
      std::memcpy(b, &v, 4);
      data.insert(data.end(), b, b + 4);
    }
  write_raw_wav(p, 3, 2, 44100, 32, data);
  const Signal s = load_wav(p);
  CHECK(s.sample_rate == 44100);
  REQUIRE(s.samples.size() == 50);
  for (double v : s.samples) CHECK(v == 0.0);
}

TEST_CASE("WAV rejects unsupported or empty input") {
  const auto p24 = temp_file("pcm24.wav");
  write_raw_wav(p24, 1, 1, 32000, 24, std::vector<char>(30, 0));
  CHECK_THROWS_AS(load_wav(p24), FormatError);
  const auto pe = temp_file("empty.wav");
  write_raw_wav(pe, 1, 1, 32000, 16, {});
  CHECK_THROWS_AS(load_wav(pe), FormatError);
  const auto pg = temp_file("garbage.wav");
  std::ofstream(pg) << "definitely not audio";
  CHECK_THROWS_AS(load_wav(pg), FormatError);
  const auto p3 = temp_file("three.wav");
  write_raw_wav(p3, 1, 3, 32000, 16, std::vector<char>(60, 0));
  CHECK_THROWS_AS(load_wav(p3), FormatError);
  CHECK_THROWS_AS(load_wav(temp_file("missing.wav")), FormatError);
}

TEST_CASE("WAV save and load round trip") {
  const Signal s{oracle::sine(4410, 44100, 440, 0.7), 44100};
  const auto pf = temp_file("rt32.wav");
  save_wav(pf, s, WavEncoding::float32);
  const Signal f = load_wav(pf);
  REQUIRE(f.samples.size() == s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i)
    CHECK(f.samples[i] == doctest::Approx(s.samples[i]).epsilon(1e-6));
  const auto pi = temp_file("rt16.wav");
  save_wav(pi, s, WavEncoding::pcm16);
  const Signal q = load_wav(pi);
  for (std::size_t i = 0; i < s.samples.size(); ++i) CHECK(std::abs(q.samples[i] - s.samples[i]) < 1e-4);
}

TEST_CASE("linear resampling preserves tone frequency") {
  const Signal s = tone(2.0, 48000, 1000, 1.0);
  const Signal r = resample_linear(s, 32000);
  CHECK(r.sample_rate == 32000);
  CHECK(std::abs(static_cast<double>(r.samples.size()) - 64000) <= 1);
  const Spectrum sp = averaged_spectrum(r, 0.128, Band{});
  std::size_t peak = 0;
  for (std::size_t i = 0; i < sp.level_db.size(); ++i)
    if (sp.level_db[i] > sp.level_db[peak]) peak = i;
  CHECK(std::abs(sp.freqs[peak] - 1000.0) <= sp.bin_width);
  CHECK_THROWS_AS(resample_linear(s, 0), DomainError);
}
