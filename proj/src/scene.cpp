#include "vanc/scene.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "vanc/errors.hpp"

namespace vanc {

void PathFIR::validate(std::size_t max_taps) const {
  if (sample_rate <= 0) throw DomainError("PathFIR: sample rate must be positive");
  if (taps.empty()) throw DomainError("PathFIR: at least one tap required");
  if (taps.size() > max_taps) throw DomainError("PathFIR: too many taps");
  for (double t : taps)
    if (!std::isfinite(t)) throw DomainError("PathFIR: non-finite tap");
}

double PathFIR::energy() const {
  double e = 0;
  for (double t : taps) e += t * t;
  return e;
}

double PathFIR::centroid_delay() const {
  double num = 0, den = 0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    num += k * taps[k];
    den += taps[k];
  }
  return den != 0 ? num / den : 0.0;
}

double PathFIR::magnitude(double f_hz) const {
  std::complex<double> acc = 0;
  const double w = 2 * std::numbers::pi * f_hz / sample_rate;
  for (std::size_t k = 0; k < taps.size(); ++k)
    acc += taps[k] * std::polar(1.0, -w * static_cast<double>(k));
  return std::abs(acc);
}

PathFIR convolve(const PathFIR& a, const PathFIR& b) {
  if (a.sample_rate != b.sample_rate) throw DomainError("convolve: rate mismatch");
  if (a.taps.empty() || b.taps.empty()) return {{}, a.sample_rate};
  PathFIR out{std::vector<double>(a.taps.size() + b.taps.size() - 1, 0.0), a.sample_rate};
  for (std::size_t i = 0; i < a.taps.size(); ++i) {
    if (a.taps[i] == 0) continue;
    for (std::size_t j = 0; j < b.taps.size(); ++j) out.taps[i + j] += a.taps[i] * b.taps[j];
  }
  return out;
}

std::string_view to_string(MembraneLocation loc) {
  switch (loc) {
    case MembraneLocation::anterior_notch: return "anterior_notch";
    case MembraneLocation::tragus: return "tragus";
    case MembraneLocation::cavum_concha: return "cavum_concha";
    case MembraneLocation::lobule: return "lobule";
  }
  return "?";
}

std::string_view to_string(Ear ear) { return ear == Ear::left ? "left" : "right"; }

MembraneLocation parse_membrane_location(std::string_view name) {
  for (auto loc : {MembraneLocation::anterior_notch, MembraneLocation::tragus,
                   MembraneLocation::cavum_concha, MembraneLocation::lobule})
    if (to_string(loc) == name) return loc;
  throw DomainError("unknown membrane location '" + std::string(name) + "'");
}

Ear parse_ear(std::string_view name) {
  if (name == "left") return Ear::left;
  if (name == "right") return Ear::right;
  throw DomainError("unknown ear '" + std::string(name) + "'");
}

namespace {

constexpr double kEarHalfWidth = 0.075;   // head centre to ear canal entrance
constexpr double kCanalDepth = 0.025;     // canal entrance to eardrum

// Pick-up offsets from the left ear canal entrance; y is mirrored for the
// right ear.
Position3 membrane_offset(MembraneLocation loc) {
  switch (loc) {
    case MembraneLocation::anterior_notch: return {0.010, 0.005, 0.015};
    case MembraneLocation::tragus: return {0.012, 0.006, 0.0};
    case MembraneLocation::cavum_concha: return {-0.004, 0.006, -0.004};
    case MembraneLocation::lobule: return {-0.002, 0.006, -0.025};
  }
  return {};
}

bool finite(const Position3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

double blackman(double t, double half_width) {
  if (std::abs(t) > half_width) return 0.0;
  const double a = std::numbers::pi * t / half_width;
  return 0.42 + 0.5 * std::cos(a) + 0.08 * std::cos(2 * a);
}

double sinc(double t) {
  if (t == 0) return 1.0;
  const double a = std::numbers::pi * t;
  return std::sin(a) / a;
}

}  // namespace

void SceneGeometry::validate() const {
  if (primary_sources.empty()) throw DomainError("geometry: no primary sources");
  for (const auto& p : primary_sources)
    if (!finite(p)) throw DomainError("geometry: non-finite source position");
  for (const auto& p : secondary_speakers)
    if (!finite(p)) throw DomainError("geometry: non-finite speaker position");
  if (!finite(ear_membrane) || !finite(eardrum_eval))
    throw DomainError("geometry: non-finite ear position");
}

Position3 SceneGeometry::membrane_normal() const {
  return ear == Ear::left ? Position3{0, 1, 0} : Position3{0, -1, 0};
}

SceneGeometry SceneGeometry::headrest(Ear ear, MembraneLocation loc,
                                      std::vector<Position3> sources,
                                      double spacing_m, double azimuth_deg) {
  if (!(spacing_m > 0) || !(azimuth_deg > 0 && azimuth_deg < 90))
    throw DomainError("headrest: spacing must be positive, azimuth in (0, 90)");
  SceneGeometry g;
  g.primary_sources = std::move(sources);
  const double half = spacing_m / 2;
  const double back = half / std::tan(azimuth_deg * std::numbers::pi / 180.0);
  g.secondary_speakers = {Position3{-back, half, 0}, Position3{-back, -half, 0}};
  const double side = ear == Ear::left ? 1.0 : -1.0;
  const Position3 canal{0, side * kEarHalfWidth, 0};
  Position3 off = membrane_offset(loc);
  off.y *= side;
  g.ear_membrane = canal + off;
  g.eardrum_eval = canal - Position3{0, side * kCanalDepth, 0};
  g.membrane_location = loc;
  g.ear = ear;
  g.validate();
  return g;
}

Position3 head_position(const HeadTrajectory& traj, double t_s) {
  if (t_s < traj.start_s) return {};
  const double s = std::sin(traj.angular_rate * (t_s - traj.start_s) + traj.phase);
  return traj.axis * (traj.amplitude_m * s);
}

PathFIR free_field_ir(Position3 src, Position3 rcv, int sample_rate,
                      std::size_t n_taps) {
  if (sample_rate <= 0) throw DomainError("free_field_ir: rate must be positive");
  const double d = std::max((src - rcv).norm(), kMinDistance);
  const double delay = d / kSpeedOfSound * sample_rate;
  const double half = kFractionalDelayTaps / 2;
  const auto base = static_cast<long>(std::floor(delay));
  const long first = base - static_cast<long>(half) + 1;
  const long last = base + static_cast<long>(half);
  if (last >= static_cast<long>(n_taps))
    throw DomainError("free_field_ir: delay of " + std::to_string(delay) +
                      " samples does not fit in " + std::to_string(n_taps) + " taps");

  PathFIR ir{std::vector<double>(n_taps, 0.0), sample_rate};
  // Kernel taps at negative time are dropped (very short paths only).
  for (long k = std::max(first, 0L); k <= last; ++k) {
    const double t = static_cast<double>(k) - delay;
    ir.taps[k] = sinc(t) * blackman(t, half);
  }
  const double e = ir.energy();
  const double scale = (1.0 / d) / std::sqrt(e);
  for (double& v : ir.taps) v *= scale;
  return ir;
}

double coupling_table_db(MembraneLocation loc, double f_hz) {
  const auto rolloff = [&](double corner) {
    return f_hz > corner ? -6.0 * std::log2(f_hz / corner) : 0.0;
  };
  switch (loc) {
    case MembraneLocation::cavum_concha:
      return 0.0;
    case MembraneLocation::anterior_notch:
    case MembraneLocation::tragus:
      return rolloff(4000.0);
    case MembraneLocation::lobule: {
      // +6 dB shelf over 5-6 kHz with raised-cosine shoulders 300 Hz wide.
      double shelf = 0;
      if (f_hz >= 5000 && f_hz <= 6000) {
        shelf = 6.0;
      } else if (f_hz > 4700 && f_hz < 5000) {
        shelf = 3.0 * (1 - std::cos(std::numbers::pi * (f_hz - 4700) / 300));
      } else if (f_hz > 6000 && f_hz < 6300) {
        shelf = 3.0 * (1 + std::cos(std::numbers::pi * (f_hz - 6000) / 300));
      }
      return rolloff(3000.0) + shelf;
    }
  }
  return 0.0;
}

double coupling_delay_s(MembraneLocation loc) {
  switch (loc) {
    case MembraneLocation::cavum_concha: return 0.0;
    case MembraneLocation::anterior_notch: return 12e-6;
    case MembraneLocation::tragus: return 16e-6;
    case MembraneLocation::lobule: return 56e-6;
  }
  return 0.0;
}

CouplingFilter coupling_filter(MembraneLocation loc, int sample_rate) {
  if (sample_rate <= 0) throw DomainError("coupling_filter: rate must be positive");
  const auto bulk = static_cast<std::size_t>(std::lround(1.5e-3 * sample_rate));
  const std::size_t length = 2 * bulk + 1;
  const std::size_t nfft = 512;
  const double delay = bulk + coupling_delay_s(loc) * sample_rate;

  std::vector<std::complex<double>> h(nfft / 2 + 1);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / nfft;
    const double mag = std::pow(10.0, coupling_table_db(loc, f) / 20.0);
    h[k] = std::polar(mag, -2 * std::numbers::pi * k * delay / nfft);
  }
  std::vector<double> impulse(nfft);
  detail::RealFft fft(nfft);
  fft.inverse(h, impulse);

  CouplingFilter c;
  c.location = loc;
  c.reference_delay = bulk;
  c.fir = {std::vector<double>(length), sample_rate};
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) - static_cast<double>(bulk);
    const double w = 0.5 * (1 + std::cos(std::numbers::pi * t / (bulk + 1.0)));
    c.fir.taps[n] = w * impulse[n] / nfft;
  }
  return c;
}

double coupling_mismatch_db(const CouplingFilter& c, double f_hz) {
  const double w = 2 * std::numbers::pi * f_hz / c.fir.sample_rate;
  std::complex<double> acc = 0;
  for (std::size_t k = 0; k < c.fir.taps.size(); ++k)
    acc += c.fir.taps[k] * std::polar(1.0, -w * (static_cast<double>(k) -
                                                  static_cast<double>(c.reference_delay)));
  return 20.0 * std::log10(std::max(std::abs(1.0 - acc), 1e-15));
}

ScenePaths scene_paths(const SceneGeometry& geometry, Position3 head_offset,
                       int sample_rate, std::size_t n_taps) {
  geometry.validate();
  const Position3 membrane = geometry.ear_membrane + head_offset;
  ScenePaths paths;
  for (const auto& src : geometry.primary_sources)
    paths.primary.push_back(free_field_ir(src, membrane, sample_rate, n_taps));
  for (std::size_t j = 0; j < 2; ++j)
    paths.secondary[j] =
        free_field_ir(geometry.secondary_speakers[j], membrane, sample_rate, n_taps);
  paths.coupling = coupling_filter(geometry.membrane_location, sample_rate);
  return paths;
}

std::size_t required_path_taps(const SceneGeometry& geometry, int sample_rate,
                               double head_margin_m) {
  double far = 0;
  for (const auto& p : geometry.primary_sources)
    far = std::max(far, (p - geometry.ear_membrane).norm());
  for (const auto& p : geometry.secondary_speakers)
    far = std::max(far, (p - geometry.ear_membrane).norm());
  const double delay = (far + head_margin_m) / kSpeedOfSound * sample_rate;
  return static_cast<std::size_t>(std::ceil(delay)) + kFractionalDelayTaps / 2 + 2;
}

double quiet_zone_radius(double f_hz) {
  if (!(f_hz > 0)) throw DomainError("quiet_zone_radius: frequency must be positive");
  return kSpeedOfSound / f_hz / 10.0;
}

Scene::Scene(SceneGeometry geometry, int sample_rate, std::size_t path_taps)
    : geometry_(std::move(geometry)),
      sample_rate_(sample_rate),
      path_taps_(path_taps),
      control_lines_{DelayLine(path_taps), DelayLine(path_taps)} {
  geometry_.validate();
  for (std::size_t i = 0; i < geometry_.primary_sources.size(); ++i)
    source_lines_.emplace_back(path_taps);
  set_head_offset({});
  primary_history_ = DelayLine(paths_.coupling.reference_delay + 1);
  secondary_history_ = DelayLine(paths_.coupling.fir.taps.size());
  coupling_support_ = support(paths_.coupling.fir);
}

Scene::Span Scene::support(const PathFIR& p) {
  const auto nz = [](double v) { return v != 0.0; };
  const auto first = std::find_if(p.taps.begin(), p.taps.end(), nz);
  if (first == p.taps.end()) return {0, 0};
  const auto last = std::find_if(p.taps.rbegin(), p.taps.rend(), nz);
  const auto a = static_cast<std::size_t>(first - p.taps.begin());
  const auto b = p.taps.size() - static_cast<std::size_t>(last - p.taps.rbegin());
  return {a, b - a};
}

double Scene::apply(const PathFIR& p, const Span& s, const DelayLine& line) const {
  return dot(std::span(p.taps).subspan(s.first, s.count),
             line.recent().subspan(s.first, s.count));
}

void Scene::set_head_offset(Position3 offset) {
  head_offset_ = offset;
  paths_ = scene_paths(geometry_, offset, sample_rate_, path_taps_);
  primary_support_.clear();
  for (const auto& p : paths_.primary) primary_support_.push_back(support(p));
  for (std::size_t j = 0; j < 2; ++j) secondary_support_[j] = support(paths_.secondary[j]);
}

ScenePressures Scene::step(std::span<const double> sources,
                           std::span<const double> controls) {
  if (sources.size() != source_lines_.size() || controls.size() != 2)
    throw ContractError("Scene::step: expected " + std::to_string(source_lines_.size()) +
                        " source samples and 2 control samples");
  ScenePressures out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    source_lines_[i].push(sources[i]);
    out.membrane_primary += apply(paths_.primary[i], primary_support_[i], source_lines_[i]);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    control_lines_[j].push(controls[j]);
    out.membrane_secondary +=
        apply(paths_.secondary[j], secondary_support_[j], control_lines_[j]);
  }
  out.membrane = out.membrane_primary + out.membrane_secondary;
  primary_history_.push(out.membrane_primary);
  secondary_history_.push(out.membrane_secondary);
  out.eardrum = primary_history_.recent()[paths_.coupling.reference_delay] +
                apply(paths_.coupling.fir, coupling_support_, secondary_history_);
  return out;
}

void Scene::reset() {
  for (auto& l : source_lines_) l.reset();
  for (auto& l : control_lines_) l.reset();
  primary_history_.reset();
  secondary_history_.reset();
}

}  // namespace vanc
