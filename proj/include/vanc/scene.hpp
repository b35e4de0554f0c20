#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vanc/dsp.hpp"

namespace vanc {

inline constexpr double kSpeedOfSound = 343.0;    // m/s
inline constexpr double kMinDistance = 0.05;      // m, 1/d clamp
inline constexpr int kFractionalDelayTaps = 32;

/// Head-centred frame: +x forward (nose), +y towards the left ear, +z up.
struct Position3 {
  double x = 0, y = 0, z = 0;

  Position3 operator+(const Position3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Position3 operator-(const Position3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Position3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Position3&) const = default;
  double dot(const Position3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

/// Acoustic path impulse response.
struct PathFIR {
  std::vector<double> taps;
  int sample_rate = 0;

  void validate(std::size_t max_taps = 1u << 20) const;
  double energy() const;
  /// First moment of the taps (low-frequency group delay), in samples.
  double centroid_delay() const;
  /// |H(f)| evaluated directly from the taps.
  double magnitude(double f_hz) const;
};

/// Full linear convolution a * b.
PathFIR convolve(const PathFIR& a, const PathFIR& b);

enum class MembraneLocation { anterior_notch, tragus, cavum_concha, lobule };
enum class Ear { left, right };

std::string_view to_string(MembraneLocation loc);
std::string_view to_string(Ear ear);
/// Throws DomainError on an unknown name.
MembraneLocation parse_membrane_location(std::string_view name);
Ear parse_ear(std::string_view name);

struct SceneGeometry {
  std::vector<Position3> primary_sources;
  std::array<Position3, 2> secondary_speakers;  // [left, right]
  Position3 ear_membrane;
  Position3 eardrum_eval;
  MembraneLocation membrane_location = MembraneLocation::cavum_concha;
  Ear ear = Ear::left;

  void validate() const;
  /// Index into secondary_speakers of the speaker serving `ear`.
  std::size_t active_speaker() const { return ear == Ear::left ? 0 : 1; }
  /// Outward normal of the membrane plane (+y for the left ear).
  Position3 membrane_normal() const;

  /// Headrest layout: two speakers `spacing_m` apart behind the head, each
  /// aimed at the head centre at `azimuth_deg` off the rear axis.
  static SceneGeometry headrest(Ear ear, MembraneLocation loc,
                                std::vector<Position3> sources,
                                double spacing_m = 0.44, double azimuth_deg = 45.0);
};

struct HeadTrajectory {
  Position3 axis{1, 0, 0};
  double amplitude_m = 0;     // half peak-to-peak
  double angular_rate = 1.0;  // rad/s
  double phase = 0;           // rad
  double start_s = 0;         // motion onset; head rests at the origin before

  double max_speed() const { return amplitude_m * angular_rate; }
};

Position3 head_position(const HeadTrajectory& traj, double t_s);

/// Point-source propagation: 1/d gain at a band-limited fractional delay d/c.
/// Throws DomainError when the delay kernel does not fit in n_taps.
PathFIR free_field_ir(Position3 src, Position3 rcv, int sample_rate,
                      std::size_t n_taps);

/// Membrane-point to eardrum relation for one pick-up location.
///
/// The eardrum pressure is modelled as
///   eardrum = delay_D * primary_at_membrane + fir * secondary_at_membrane,
/// so a location whose `fir` is a pure D-sample delay (cavum concha) sees at
/// the eardrum exactly the membrane pressure, delayed by D.
struct CouplingFilter {
  PathFIR fir;
  std::size_t reference_delay = 0;
  MembraneLocation location = MembraneLocation::cavum_concha;
};

/// Tabulated coupling magnitude (dB) for a location.
double coupling_table_db(MembraneLocation loc, double f_hz);
/// Extra arrival-time offset of the secondary field at the eardrum, seconds.
double coupling_delay_s(MembraneLocation loc);
CouplingFilter coupling_filter(MembraneLocation loc, int sample_rate);
/// 20 log10 |1 - C(f) e^{j 2 pi f D / fs}|: eardrum residual per unit of
/// primary pressure when the membrane pressure is cancelled exactly.
double coupling_mismatch_db(const CouplingFilter& c, double f_hz);

struct ScenePaths {
  std::vector<PathFIR> primary;          // per primary source -> membrane
  std::array<PathFIR, 2> secondary;      // per speaker -> membrane
  CouplingFilter coupling;
};

/// Paths for the geometry with membrane and eardrum translated by head_offset.
ScenePaths scene_paths(const SceneGeometry& geometry, Position3 head_offset,
                       int sample_rate, std::size_t n_taps);

/// Path length sufficient for every source within the geometry, allowing the
/// head to move by up to `head_margin_m`.
std::size_t required_path_taps(const SceneGeometry& geometry, int sample_rate,
                               double head_margin_m);

/// Radius of the 10 dB quiet zone, a tenth of the wavelength.
double quiet_zone_radius(double f_hz);

struct ScenePressures {
  double eardrum = 0;
  double membrane = 0;
  double membrane_primary = 0;
  double membrane_secondary = 0;
};

/// Streaming acoustic scene: owns the source and control delay lines.
///
/// Paths are refreshed only through set_head_offset(), which the harness
/// calls at tracker frame boundaries.
class Scene {
 public:
  Scene(SceneGeometry geometry, int sample_rate, std::size_t path_taps);

  void set_head_offset(Position3 offset);
  Position3 head_offset() const { return head_offset_; }
  Position3 membrane_position() const { return geometry_.ear_membrane + head_offset_; }

  /// One sample per primary source and per secondary speaker.
  ScenePressures step(std::span<const double> sources,
                      std::span<const double> controls);

  const ScenePaths& paths() const { return paths_; }
  const SceneGeometry& geometry() const { return geometry_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t path_taps() const { return path_taps_; }
  void reset();

 private:
  struct Span {
    std::size_t first = 0;
    std::size_t count = 0;
  };
  static Span support(const PathFIR& p);
  double apply(const PathFIR& p, const Span& s, const DelayLine& line) const;

  SceneGeometry geometry_;
  int sample_rate_;
  std::size_t path_taps_;
  Position3 head_offset_;
  ScenePaths paths_;
  std::vector<Span> primary_support_;
  std::array<Span, 2> secondary_support_;
  Span coupling_support_;
  std::vector<DelayLine> source_lines_;
  std::array<DelayLine, 2> control_lines_;
  DelayLine primary_history_;
  DelayLine secondary_history_;
};

}  // namespace vanc
