#include "vanc/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "vanc/errors.hpp"

namespace vanc {

double Vec2::norm() const { return std::hypot(u, v); }

FrameImage::FrameImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 16 || height < 16) throw DomainError("frames must be at least 16x16");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

PixelCoord Camera::project(Vec2 world) const {
  const PixelCoord c = center();
  return {c.x + world.u / beta(), c.y + world.v / beta()};
}

FrameImage render_disk(int width, int height, PixelCoord center, double radius_px) {
  FrameImage img(width, height);
  constexpr int kSub = 4;
  const int x0 = std::max(0, static_cast<int>(std::floor(center.x - radius_px - 1)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(center.x + radius_px + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(center.y - radius_px - 1)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(center.y + radius_px + 1)));
  const double r2 = radius_px * radius_px;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      int inside = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double px = x - 0.5 + (sx + 0.5) / kSub - center.x;
          const double py = y - 0.5 + (sy + 0.5) / kSub - center.y;
          inside += (px * px + py * py <= r2);
        }
      }
      img.set(x, y, static_cast<std::uint8_t>(std::lround(255.0 * inside / (kSub * kSub))));
    }
  }
  return img;
}

FrameImage render_frame(Vec2 marker_world, const Camera& camera) {
  const PixelCoord p = camera.project(marker_world);
  if (p.x < -0.5 || p.y < -0.5 || p.x > camera.width - 0.5 || p.y > camera.height - 0.5)
    return FrameImage(camera.width, camera.height);
  return render_disk(camera.width, camera.height, p, camera.marker_radius_m / camera.beta());
}

BinaryImage binarize(const FrameImage& frame, int lambda) {
  if (lambda <= 0 || lambda > 255) throw DomainError("threshold must be in (0, 255]");
  BinaryImage b{frame.width(), frame.height(), {}};
  b.bits.reserve(frame.pixels().size());
  for (std::uint8_t p : frame.pixels()) b.bits.push_back(p >= lambda ? 1 : 0);
  return b;
}

PixelCoord centroid(const BinaryImage& binary) {
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (int y = 0; y < binary.height; ++y) {
    for (int x = 0; x < binary.width; ++x) {
      if (binary.at(x, y)) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  if (n == 0) throw TargetLostError("no marker pixels above threshold");
  return {sx / n, sy / n};
}

Vec2 pixel_velocity(PixelCoord prev, PixelCoord cur, double frame_rate) {
  return {(cur.x - prev.x) * frame_rate, (cur.y - prev.y) * frame_rate};
}

Vec2 to_world(Vec2 v_p, double beta) { return v_p * beta; }

Calibration calibrate_beta(double distance_m, double known_shift_world_m,
                           double observed_shift_px) {
  if (!(std::abs(observed_shift_px) >= 1.0))
    throw CalibrationError("calibration shift must be at least one pixel");
  if (!(distance_m > 0)) throw CalibrationError("calibration distance must be positive");
  return {known_shift_world_m / observed_shift_px, distance_m};
}

Calibration calibrate_camera(const Camera& camera, double shift_m, int lambda) {
  const PixelCoord a = centroid(binarize(render_frame({0, 0}, camera), lambda));
  const PixelCoord b = centroid(binarize(render_frame({shift_m, 0}, camera), lambda));
  return calibrate_beta(camera.distance_m, shift_m, b.x - a.x);
}

Tracker::Tracker(Calibration calibration, Options options)
    : calibration_(calibration), options_(options), target_(options.marker_offset) {
  if (!(calibration.beta > 0)) throw DomainError("tracker beta must be positive");
  if (!(options.frame_rate > 0)) throw DomainError("tracker frame rate must be positive");
}

GalvoCommand Tracker::step(const FrameImage& frame) {
  PixelCoord c;
  try {
    c = centroid(binarize(frame, options_.threshold));
  } catch (const TargetLostError&) {
    return {target_, true};
  }
  const PixelCoord mid{(frame.width() - 1) / 2.0, (frame.height() - 1) / 2.0};
  if (prev_) {
    velocity_ = to_world(pixel_velocity(*prev_, c, options_.frame_rate), calibration_.beta);
  }
  if (options_.mode == Mode::absolute || !prev_) {
    const Vec2 marker = to_world({c.x - mid.x, c.y - mid.y}, calibration_.beta);
    target_ = marker + options_.marker_offset;
  } else {
    target_ = target_ + velocity_ * (1.0 / options_.frame_rate);
  }
  prev_ = c;
  return {target_, false};
}

void write_pgm(const std::filesystem::path& path, const FrameImage& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels().data()),
            static_cast<std::streamsize>(frame.pixels().size()));
}

}  // namespace vanc
