#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace vanc::detail {

namespace {
// The FFTW planner is not re-entrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Plans {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

RealFft::RealFft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  const int len = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  plans_->real = fftw_alloc_real(n);
  plans_->spec = fftw_alloc_complex(n / 2 + 1);
  plans_->fwd = fftw_plan_dft_r2c_1d(len, plans_->real, plans_->spec, FFTW_ESTIMATE);
  plans_->inv = fftw_plan_dft_c2r_1d(len, plans_->spec, plans_->real,
                                     FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->fwd);
  fftw_destroy_plan(plans_->inv);
  fftw_free(plans_->real);
  fftw_free(plans_->spec);
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), plans_->real);
  fftw_execute(plans_->fwd);
  for (std::size_t k = 0; k < n_ / 2 + 1; ++k)
    out[k] = {plans_->spec[k][0], plans_->spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  for (std::size_t k = 0; k < n_ / 2 + 1; ++k) {
    plans_->spec[k][0] = in[k].real();
    plans_->spec[k][1] = in[k].imag();
  }
  fftw_execute(plans_->inv);
  std::copy(plans_->real, plans_->real + n_, out.begin());
}

}  // namespace vanc::detail
