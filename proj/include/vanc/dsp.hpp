#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace vanc {

/// Fixed-length history of a scalar stream, newest sample first.
///
/// Samples are mirrored into a double-length buffer so that `recent()` is
/// always one contiguous span; FIR evaluation is a plain dot product.
class DelayLine {
 public:
  explicit DelayLine(std::size_t length = 1);

  void push(double v) {
    pos_ = (pos_ == 0 ? length_ : pos_) - 1;
    buf_[pos_] = v;
    buf_[pos_ + length_] = v;
  }
  /// recent()[k] is the sample pushed k steps ago.
  std::span<const double> recent() const { return {buf_.data() + pos_, length_}; }
  std::size_t size() const { return length_; }
  void reset();

 private:
  std::vector<double> buf_;
  std::size_t length_;
  std::size_t pos_ = 0;
};

double dot(std::span<const double> a, std::span<const double> b);

/// Direct-form-II-transposed biquad, normalized so a0 == 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double z1 = 0, z2 = 0;

  double process(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
  void reset() { z1 = z2 = 0; }

  static Biquad lowpass(double fc, double q, double fs);
  static Biquad highpass(double fc, double q, double fs);
  static Biquad first_order_lowpass(double fc, double fs);
};

/// Second-order sections of an even-order Butterworth filter.
std::vector<Biquad> butterworth_lowpass(int order, double fc, double fs);
std::vector<Biquad> butterworth_highpass(int order, double fc, double fs);

/// Seedable, platform-independent random stream.
///
/// std::mt19937_64 is fully specified by the standard; the distributions are
/// not, so uniform and Gaussian draws are derived here directly from the
/// raw 64-bit output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1).
  double uniform();
  double gaussian();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer, used to derive independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace vanc
