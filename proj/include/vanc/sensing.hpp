#pragma once

#include <cstdint>

#include "vanc/dsp.hpp"
#include "vanc/scene.hpp"

namespace vanc {

/// Pressure-to-velocity FIR of the retro-reflective membrane: resonant
/// second-order high-pass (300 Hz) cascaded with a first-order low-pass,
/// scaled to 1e-3 (m/s)/Pa at 2 kHz.
PathFIR membrane_response(int sample_rate);

inline constexpr double kMembraneMidbandGain = 1e-3;  // (m/s)/Pa

/// Retro-reflective membrane pick-up worn near the ear canal.
class MembranePickup {
 public:
  MembranePickup(Position3 center, int sample_rate);

  /// Streams one pressure sample through the response; returns velocity.
  double velocity(double pressure);
  void reset() { history_.reset(); }

  double diameter_m() const { return diameter_m_; }
  double radius_m() const { return diameter_m_ / 2; }
  double depth_m() const { return depth_m_; }
  double mass_kg() const { return mass_kg_; }
  Position3 center() const { return center_; }
  void set_center(Position3 c) { center_ = c; }
  const PathFIR& response() const { return response_; }

 private:
  double diameter_m_ = 9.2e-3;
  double depth_m_ = 4.6e-3;
  double mass_kg_ = 0.2e-3;
  Position3 center_;
  PathFIR response_;
  DelayLine history_;
};

/// Gain of the LDV return versus beam incidence: cos(theta)^k with k set so
/// 60 degrees costs 5 dB. Throws DomainError outside [0, 90).
double incidence_gain(double incidence_deg);

struct BeamState {
  double spot_u = 0;  // m, in the membrane plane, relative to its centre
  double spot_v = 0;
  double incidence_deg = 0;

  double offset() const;
};

struct LdvReading {
  double velocity = 0;
  bool on_membrane = true;
};

/// Laser Doppler vibrometer channel with instrument noise and dropout.
class Ldv {
 public:
  struct Options {
    bool noise = true;
    double noise_density = 20e-9;  // m/s/sqrt(Hz)
    double dropout_db = 60.0;      // dropout noise above the floor
  };

  Ldv(Options options, int sample_rate, std::uint64_t seed);

  LdvReading measure(const BeamState& beam, const MembranePickup& pickup,
                     double true_velocity);

  /// Per-sample RMS of the white noise floor over the full band.
  double noise_rms() const;
  double dropout_rms() const;
  const Options& options() const { return options_; }

 private:
  Options options_;
  int sample_rate_;
  Rng rng_;
};

}  // namespace vanc
