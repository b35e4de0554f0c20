#include "vanc/control.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "vanc/errors.hpp"

namespace vanc {

DivergenceGuard::DivergenceGuard(Options options, int sample_rate)
    : options_(options),
      window_(std::max<std::size_t>(1, static_cast<std::size_t>(
                                           std::lround(options.window_s * sample_rate)))),
      arm_(static_cast<std::size_t>(std::lround(std::max(0.0, options.arm_s) * sample_rate))),
      squares_(window_, 0.0) {
  if (!(options.trip_ratio > 1)) throw DomainError("guard trip_ratio must exceed 1");
  if (!(options.window_s > 0)) throw DomainError("guard window must be positive");
  if (sample_rate <= 0) throw DomainError("guard sample rate must be positive");
  if (arm_ == 0) phase_ = Phase::measuring;
}

double DivergenceGuard::running_power() const {
  return count_ == 0 ? 0.0 : std::max(sum_, 0.0) / std::min(count_, window_);
}

bool DivergenceGuard::update(double e) {
  if (phase_ == Phase::tripped) return true;
  if (phase_ == Phase::waiting) {
    if (++since_refresh_ >= arm_) {
      phase_ = Phase::measuring;
      since_refresh_ = 0;
    }
    return false;
  }

  const double sq = e * e;
  sum_ += sq - squares_[head_];
  squares_[head_] = sq;
  head_ = (head_ + 1) % window_;
  ++count_;
  if (++since_refresh_ >= window_) {
    // Re-sum once per window so rounding in the running sum cannot drift.
    sum_ = 0;
    for (double v : squares_) sum_ += v;
    since_refresh_ = 0;
  }

  if (phase_ == Phase::measuring) {
    if (count_ >= window_) {
      baseline_ = running_power();
      phase_ = Phase::monitoring;
    }
    return false;
  }
  const double floor = std::max(baseline_, 1e-300);
  if (running_power() > options_.trip_ratio * floor) {
    phase_ = Phase::tripped;
    trip_sample_ = arm_ + count_ - 1;
    return true;
  }
  return false;
}

void DivergenceGuard::reset() {
  phase_ = arm_ == 0 ? Phase::measuring : Phase::waiting;
  std::fill(squares_.begin(), squares_.end(), 0.0);
  head_ = 0;
  sum_ = 0;
  count_ = 0;
  since_refresh_ = 0;
  baseline_ = 0;
  trip_sample_.reset();
}

FxLmsController::FxLmsController(PathFIR s_hat, Options options)
    : options_(options),
      s_hat_(std::move(s_hat)),
      w_(options.taps, 0.0),
      x_(std::max(options.taps, s_hat_.taps.size())),
      rhat_(std::max<std::size_t>(options.taps, 1)) {
  if (options.taps == 0) throw DomainError("controller needs at least one tap");
  if (!(options.mu0 > 0)) throw DomainError("controller step size must be positive");
  if (options.leakage < 0 || options.leakage >= 1)
    throw DomainError("controller leakage must be in [0, 1)");
  s_hat_.validate();
}

double FxLmsController::output(double x) {
  if (!std::isfinite(x)) throw ContractError("FxLMS: non-finite reference sample");
  x_.push(x);
  const auto xr = x_.recent();
  const double r = dot(s_hat_.taps, xr.first(s_hat_.taps.size()));

  const double leaving = rhat_.recent().back();
  rhat_.push(r);
  rhat_energy_ += r * r - leaving * leaving;
  if (++since_refresh_ >= options_.taps) {
    const auto rr = rhat_.recent();
    rhat_energy_ = dot(rr, rr);
    since_refresh_ = 0;
  }
  pending_ = true;
  if (frozen_) return 0.0;
  return dot(w_, xr.first(options_.taps));
}

double FxLmsController::step_size() const {
  if (!options_.normalized) return options_.mu0;
  return options_.mu0 / (options_.epsilon + std::max(rhat_energy_, 0.0));
}

void FxLmsController::adapt(double e) {
  if (!std::isfinite(e)) throw ContractError("FxLMS: non-finite error sample");
  if (guard_ && guard_->update(e) && guard_->options().freeze) frozen_ = true;
  if (frozen_ || !pending_) return;
  pending_ = false;
  const double g = step_size() * e;
  const double leak = 1.0 - options_.leakage;
  const auto r = rhat_.recent();
  if (leak == 1.0) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] -= g * r[k];
  } else {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] = leak * w_[k] - g * r[k];
  }
}

double FxLmsController::step(double x, double e_prev) {
  adapt(e_prev);
  return output(x);
}

void FxLmsController::set_secondary_estimate(PathFIR s_hat) {
  s_hat.validate();
  if (s_hat.taps.size() > x_.size())
    throw DomainError("secondary estimate longer than the reference history");
  s_hat_ = std::move(s_hat);
}

void FxLmsController::set_coefficients(std::span<const double> w) {
  if (w.size() != w_.size()) throw ContractError("coefficient count mismatch");
  std::copy(w.begin(), w.end(), w_.begin());
}

void FxLmsController::reset() {
  std::fill(w_.begin(), w_.end(), 0.0);
  x_.reset();
  rhat_.reset();
  rhat_energy_ = 0;
  since_refresh_ = 0;
  pending_ = false;
  frozen_ = false;
  if (guard_) guard_->reset();
}

std::vector<double> wiener_oracle(const Signal& x, const Signal& d, const PathFIR& s,
                                  std::size_t taps) {
  if (x.samples.size() != d.samples.size())
    throw DomainError("wiener_oracle: x and d differ in length");
  if (taps == 0 || x.samples.size() <= taps)
    throw DomainError("wiener_oracle: signal must be longer than the filter");
  const std::size_t n = x.samples.size();

  // r = s * x, truncated to n samples.
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0;
    for (std::size_t k = 0; k < s.taps.size() && k <= i; ++k) acc += s.taps[k] * x.samples[i - k];
    r[i] = acc;
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(taps));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < taps && k <= i; ++k)
      R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[i - k];
  const Eigen::Map<const Eigen::VectorXd> dv(d.samples.data(), static_cast<Eigen::Index>(n));

  Eigen::MatrixXd A = R.transpose() * R;
  const Eigen::VectorXd b = R.transpose() * dv;
  const double ridge = 1e-10 * A.trace() / static_cast<double>(taps);
  A.diagonal().array() += ridge > 0 ? ridge : 1e-300;
  const Eigen::VectorXd w = A.ldlt().solve(-b);
  return {w.data(), w.data() + w.size()};
}

std::optional<double> misalignment_db(std::span<const double> truth,
                                      std::span<const double> estimate) {
  double num = 0, den = 0;
  const std::size_t n = std::max(truth.size(), estimate.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i < truth.size() ? truth[i] : 0.0;
    const double e = i < estimate.size() ? estimate[i] : 0.0;
    num += (t - e) * (t - e);
    den += t * t;
  }
  if (den == 0) return std::nullopt;
  if (num == 0) return -400.0;
  return 10.0 * std::log10(num / den);
}

IdentificationResult identify_secondary_path(const Signal& excite,
                                             const Signal& response,
                                             std::size_t taps, double mu_id,
                                             const PathFIR* truth) {
  if (excite.samples.size() != response.samples.size())
    throw IdentificationError("identification: excitation and response lengths differ");
  if (taps == 0) throw IdentificationError("identification: zero taps");
  if (!(mu_id > 0)) throw IdentificationError("identification: step size must be positive");
  const double ex_power = dot(excite.samples, excite.samples);
  if (ex_power == 0) throw IdentificationError("identification: no excitation");
  const double resp_power = dot(response.samples, response.samples);
  const double bound = 1e6 * (std::sqrt(resp_power / ex_power) + 1.0);

  std::vector<double> h(taps, 0.0);
  DelayLine u(taps);
  double energy = 0;
  for (std::size_t n = 0; n < excite.samples.size(); ++n) {
    const double leaving = u.recent().back();
    u.push(excite.samples[n]);
    energy += excite.samples[n] * excite.samples[n] - leaving * leaving;
    if (n % taps == 0) energy = dot(u.recent(), u.recent());
    const double err = response.samples[n] - dot(h, u.recent());
    const double g = mu_id * err / (1e-12 + std::max(energy, 0.0));
    const auto ur = u.recent();
    for (std::size_t k = 0; k < taps; ++k) h[k] += g * ur[k];
    if (n % 256 == 255) {
      const double norm = std::sqrt(dot(h, h));
      if (!std::isfinite(norm) || norm > bound)
        throw IdentificationError("identification diverged at sample " + std::to_string(n));
    }
  }
  const double norm = std::sqrt(dot(h, h));
  if (!std::isfinite(norm) || norm > bound)
    throw IdentificationError("identification diverged");

  IdentificationResult result{{h, excite.sample_rate}, std::nullopt};
  if (truth) result.misalignment_db = misalignment_db(truth->taps, h);
  return result;
}

}  // namespace vanc
