#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace vanc {

/// 2-D vector in the tracking plane (m, or px where noted).
struct Vec2 {
  double u = 0, v = 0;

  Vec2 operator+(const Vec2& o) const { return {u + o.u, v + o.v}; }
  Vec2 operator-(const Vec2& o) const { return {u - o.u, v - o.v}; }
  Vec2 operator*(double s) const { return {u * s, v * s}; }
  bool operator==(const Vec2&) const = default;
  double norm() const;
};

/// Sub-pixel image coordinates: x is the column, y the row, pixel centres on
/// integers.
struct PixelCoord {
  double x = 0, y = 0;
  bool operator==(const PixelCoord&) const = default;
};

class FrameImage {
 public:
  FrameImage(int width, int height, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  void set(int x, int y, std::uint8_t v) { pixels_[index(x, y)] = v; }
  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_, height_;
  std::vector<std::uint8_t> pixels_;
};

struct BinaryImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major

  std::uint8_t at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x];
  }
};

/// Orthographic synthetic camera. One pixel spans beta = distance * ifov
/// metres on the target plane; world (0, 0) projects to the image centre.
struct Camera {
  int width = 320;
  int height = 240;
  double ifov_rad = 5e-4 / 0.3;  // per-pixel angle
  double distance_m = 0.3;
  double marker_radius_m = 3e-3;

  double beta() const { return distance_m * ifov_rad; }
  PixelCoord center() const { return {(width - 1) / 2.0, (height - 1) / 2.0}; }
  PixelCoord project(struct Vec2 world) const;
};

/// Filled disk of intensity 255 on 0, rim anti-aliased by 4x4 supersampling.
FrameImage render_disk(int width, int height, PixelCoord center, double radius_px);

/// Marker as seen by the camera; all-zero when its centre is out of view.
FrameImage render_frame(Vec2 marker_world, const Camera& camera);

/// B = 1 where I >= lambda. Throws DomainError unless 0 < lambda <= 255.
BinaryImage binarize(const FrameImage& frame, int lambda);

/// Mean coordinate of the set pixels. Throws TargetLostError when empty.
PixelCoord centroid(const BinaryImage& binary);

/// (cur - prev) * frame_rate, px/s.
Vec2 pixel_velocity(PixelCoord prev, PixelCoord cur, double frame_rate);

/// Component-wise beta * v_p.
Vec2 to_world(Vec2 v_p, double beta);

struct Calibration {
  double beta = 0;        // m/px
  double distance_m = 0;  // camera to target at calibration time
};

/// beta = known world shift / observed pixel shift. Throws CalibrationError
/// for shifts below one pixel.
Calibration calibrate_beta(double distance_m, double known_shift_world_m,
                           double observed_shift_px);

/// Runs the calibration move on the synthetic camera: renders the marker at
/// the origin and at `shift_m` along u and measures the centroid shift.
Calibration calibrate_camera(const Camera& camera, double shift_m, int lambda = 128);

struct GalvoCommand {
  Vec2 beam_target;  // m, tracking-plane coordinates
  bool lost = false;
};

/// Frame-rate marker tracker producing beam-steering targets.
class Tracker {
 public:
  enum class Mode { absolute, velocity };
  struct Options {
    double frame_rate = 30.0;
    int threshold = 128;
    Vec2 marker_offset;  // marker centre -> membrane centre, m
    Mode mode = Mode::absolute;
  };

  Tracker(Calibration calibration, Options options);

  /// On target loss the previous beam target is held and `lost` is set.
  GalvoCommand step(const FrameImage& frame);

  std::optional<PixelCoord> previous_centroid() const { return prev_; }
  /// Marker velocity from the last two centroids, m/s.
  Vec2 velocity() const { return velocity_; }
  Vec2 beam_target() const { return target_; }
  const Calibration& calibration() const { return calibration_; }
  const Options& options() const { return options_; }

 private:
  Calibration calibration_;
  Options options_;
  std::optional<PixelCoord> prev_;
  Vec2 velocity_;
  Vec2 target_;
};

/// Binary (P5) PGM dump of a frame.
void write_pgm(const std::filesystem::path& path, const FrameImage& frame);

}  // namespace vanc
