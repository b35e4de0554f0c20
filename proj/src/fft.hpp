#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace vanc::detail {

/// Real-to-complex / complex-to-real transform of a fixed length.
///
/// Plans are created with FFTW_ESTIMATE so the chosen algorithm (and thus
/// the rounding) does not depend on timing measurements.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  /// in.size() == n, out.size() == n/2 + 1.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Unnormalized inverse: out = n * x for out = inverse(forward(x)).
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace vanc::detail
