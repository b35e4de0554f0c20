#include "vanc/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vanc {

DelayLine::DelayLine(std::size_t length)
    : buf_(2 * length, 0.0), length_(length) {
  if (length == 0) throw std::invalid_argument("DelayLine length must be > 0");
}

void DelayLine::reset() {
  std::fill(buf_.begin(), buf_.end(), 0.0);
  pos_ = 0;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  // Four accumulators let the compiler vectorize without -ffast-math.
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

Biquad Biquad::lowpass(double fc, double q, double fs) {
  const double w0 = 2 * std::numbers::pi * fc / fs;
  const double alpha = std::sin(w0) / (2 * q);
  const double c = std::cos(w0);
  const double a0 = 1 + alpha;
  Biquad bq;
  bq.b0 = (1 - c) / 2 / a0;
  bq.b1 = (1 - c) / a0;
  bq.b2 = bq.b0;
  bq.a1 = -2 * c / a0;
  bq.a2 = (1 - alpha) / a0;
  return bq;
}

Biquad Biquad::highpass(double fc, double q, double fs) {
  const double w0 = 2 * std::numbers::pi * fc / fs;
  const double alpha = std::sin(w0) / (2 * q);
  const double c = std::cos(w0);
  const double a0 = 1 + alpha;
  Biquad bq;
  bq.b0 = (1 + c) / 2 / a0;
  bq.b1 = -(1 + c) / a0;
  bq.b2 = bq.b0;
  bq.a1 = -2 * c / a0;
  bq.a2 = (1 - alpha) / a0;
  return bq;
}

Biquad Biquad::first_order_lowpass(double fc, double fs) {
  // Bilinear transform with prewarping at fc.
  const double k = std::tan(std::numbers::pi * fc / fs);
  Biquad bq;
  bq.b0 = k / (1 + k);
  bq.b1 = bq.b0;
  bq.a1 = (k - 1) / (1 + k);
  return bq;
}

namespace {
std::vector<double> butterworth_qs(int order) {
  if (order < 2 || order % 2 != 0)
    throw std::invalid_argument("Butterworth order must be even and >= 2");
  std::vector<double> qs;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2 * k + 1) / (2.0 * order);
    qs.push_back(1.0 / (2 * std::sin(theta)));
  }
  return qs;
}
}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double fc, double fs) {
  std::vector<Biquad> sos;
  for (double q : butterworth_qs(order)) sos.push_back(Biquad::lowpass(fc, q, fs));
  return sos;
}

std::vector<Biquad> butterworth_highpass(int order, double fc, double fs) {
  std::vector<Biquad> sos;
  for (double q : butterworth_qs(order)) sos.push_back(Biquad::highpass(fc, q, fs));
  return sos;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace vanc
