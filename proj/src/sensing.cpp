#include "vanc/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vanc/errors.hpp"

namespace vanc {

namespace {
constexpr double kResonanceHz = 300.0;
constexpr double kResonanceQ = 0.9;
constexpr double kLowpassHz = 12000.0;
constexpr double kResponseLength_s = 10e-3;
constexpr double kReferenceHz = 2000.0;
}  // namespace

PathFIR membrane_response(int sample_rate) {
  if (sample_rate <= 0) throw DomainError("membrane_response: rate must be positive");
  const double fs = sample_rate;
  Biquad hp = Biquad::highpass(kResonanceHz, kResonanceQ, fs);
  Biquad lp = Biquad::first_order_lowpass(std::min(kLowpassHz, 0.45 * fs), fs);
  const auto n = static_cast<std::size_t>(std::lround(kResponseLength_s * fs));
  PathFIR ir{std::vector<double>(n), sample_rate};
  for (std::size_t i = 0; i < n; ++i) ir.taps[i] = lp.process(hp.process(i == 0 ? 1.0 : 0.0));
  const double scale = kMembraneMidbandGain / ir.magnitude(kReferenceHz);
  for (double& t : ir.taps) t *= scale;
  return ir;
}

MembranePickup::MembranePickup(Position3 center, int sample_rate)
    : center_(center), response_(membrane_response(sample_rate)),
      history_(response_.taps.size()) {}

double MembranePickup::velocity(double pressure) {
  history_.push(pressure);
  return dot(response_.taps, history_.recent());
}

double incidence_gain(double incidence_deg) {
  if (!(incidence_deg >= 0 && incidence_deg < 90))
    throw DomainError("incidence angle must be in [0, 90) degrees");
  static const double k = std::log(std::pow(10.0, -5.0 / 20.0)) / std::log(0.5);
  return std::pow(std::cos(incidence_deg * std::numbers::pi / 180.0), k);
}

double BeamState::offset() const { return std::hypot(spot_u, spot_v); }

Ldv::Ldv(Options options, int sample_rate, std::uint64_t seed)
    : options_(options), sample_rate_(sample_rate), rng_(seed) {
  if (sample_rate <= 0) throw DomainError("LDV sample rate must be positive");
}

double Ldv::noise_rms() const {
  return options_.noise_density * std::sqrt(sample_rate_ / 2.0);
}

double Ldv::dropout_rms() const {
  return noise_rms() * std::pow(10.0, options_.dropout_db / 20.0);
}

LdvReading Ldv::measure(const BeamState& beam, const MembranePickup& pickup,
                        double true_velocity) {
  if (beam.offset() > pickup.radius_m()) return {dropout_rms() * rng_.gaussian(), false};
  double v = incidence_gain(beam.incidence_deg) * true_velocity;
  if (options_.noise) v += noise_rms() * rng_.gaussian();
  return {v, true};
}

}  // namespace vanc
