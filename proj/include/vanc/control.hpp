#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vanc/dsp.hpp"
#include "vanc/scene.hpp"
#include "vanc/signal.hpp"

namespace vanc {

/// Running-power divergence detector on the error stream.
///
/// Timeline: `arm_s` of ignored samples, one window to measure the baseline
/// power, then continuous monitoring. Once tripped it stays tripped until
/// reset(), which also re-measures the baseline.
class DivergenceGuard {
 public:
  struct Options {
    double window_s = 0.25;
    double trip_ratio = 100.0;
    double arm_s = 0.0;
    bool freeze = true;  // tripping freezes the controller it is attached to
  };
  enum class Phase { waiting, measuring, monitoring, tripped };

  DivergenceGuard(Options options, int sample_rate);

  /// Feeds one error sample; returns the tripped flag.
  bool update(double e);
  void reset();

  bool tripped() const { return phase_ == Phase::tripped; }
  Phase phase() const { return phase_; }
  double baseline_power() const { return baseline_; }
  double running_power() const;
  /// Index (samples since construction/reset) at which the guard tripped.
  std::optional<std::size_t> trip_sample() const { return trip_sample_; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  std::size_t window_;
  std::size_t arm_;
  Phase phase_ = Phase::waiting;
  std::vector<double> squares_;
  std::size_t head_ = 0;
  double sum_ = 0;
  std::size_t count_ = 0;
  std::size_t since_refresh_ = 0;
  double baseline_ = 0;
  std::optional<std::size_t> trip_sample_;
};

/// Single-channel feedforward filtered-x LMS controller.
///
/// Per sample the caller emits y(n) = output(x(n)) with the current
/// coefficients, lets the plant respond, then calls adapt(e(n)), which
/// applies w <- leak * w - mu * r(n) * e(n) with r(n) the filtered reference
/// vector built by the same output() call.
class FxLmsController {
 public:
  struct Options {
    std::size_t taps = 1024;
    double mu0 = 0.05;
    bool normalized = true;  // mu = mu0 / (epsilon + |r(n)|^2)
    double epsilon = 1e-12;
    double leakage = 0.0;    // w <- (1 - leakage) w - ...
  };

  FxLmsController(PathFIR s_hat, Options options);

  double output(double x);
  void adapt(double e);
  /// adapt(e_prev) for the previously emitted sample, then output(x).
  double step(double x, double e_prev);

  void set_secondary_estimate(PathFIR s_hat);
  void set_coefficients(std::span<const double> w);
  void attach_guard(DivergenceGuard guard) { guard_.emplace(std::move(guard)); }

  std::span<const double> coefficients() const { return w_; }
  /// r(n), newest first; the vector adapt() will use.
  std::span<const double> filtered_reference() const { return rhat_.recent(); }
  const PathFIR& secondary_estimate() const { return s_hat_; }
  /// Step size the next adapt() call will use.
  double step_size() const;
  const std::optional<DivergenceGuard>& guard() const { return guard_; }
  const Options& options() const { return options_; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  void reset();

 private:
  Options options_;
  PathFIR s_hat_;
  std::vector<double> w_;
  DelayLine x_;
  DelayLine rhat_;
  double rhat_energy_ = 0;
  std::size_t since_refresh_ = 0;
  bool pending_ = false;
  bool frozen_ = false;
  std::optional<DivergenceGuard> guard_;
};

/// Batch least-squares minimizer of |d + s * (w * x)|^2 over L-tap w, with a
/// ridge of 1e-10 times the mean diagonal of the normal matrix.
std::vector<double> wiener_oracle(const Signal& x, const Signal& d,
                                  const PathFIR& s, std::size_t taps);

/// 20 log10(|truth - estimate| / |truth|); empty when |truth| == 0.
std::optional<double> misalignment_db(std::span<const double> truth,
                                      std::span<const double> estimate);

struct IdentificationResult {
  PathFIR estimate;
  std::optional<double> misalignment_db;  // only with a known, non-zero truth
};

/// Normalized-LMS identification of a path from excitation and response.
/// Throws IdentificationError without excitation or on divergence.
IdentificationResult identify_secondary_path(const Signal& excite,
                                             const Signal& response,
                                             std::size_t taps, double mu_id,
                                             const PathFIR* truth = nullptr);

}  // namespace vanc
