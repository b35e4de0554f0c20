#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "vanc/errors.hpp"
#include "vanc/tracking.hpp"

using namespace vanc;

namespace {

PixelCoord measured(const FrameImage& f) { return centroid(binarize(f, 128)); }

}  // namespace

TEST_CASE("rendered marker sits at the projected position") {
  const Camera cam;
  const PixelCoord c0 = measured(render_frame({0, 0}, cam));
  CHECK(std::abs(c0.x - cam.center().x) <= 0.5);
  CHECK(std::abs(c0.y - cam.center().y) <= 0.5);
  const PixelCoord c1 = measured(render_frame({10 * cam.beta(), 0}, cam));
  CHECK(c1.x - c0.x == doctest::Approx(10.0).epsilon(0.01));
  CHECK(c1.y == doctest::Approx(c0.y));
  const FrameImage out = render_frame({0.5, 0}, cam);
  for (auto p : out.pixels()) CHECK(p == 0);
  CHECK_THROWS_AS(FrameImage(8, 64), DomainError);
}

TEST_CASE("binarization follows the inclusive threshold") {
  const FrameImage black(32, 32, 0), white(32, 32, 255);
  for (auto b : binarize(black, 1).bits) CHECK(b == 0);
  for (auto b : binarize(white, 128).bits) CHECK(b == 1);
  FrameImage f(32, 32);
  f.set(3, 4, 128);
  f.set(5, 6, 127);
  const BinaryImage b = binarize(f, 128);
  CHECK(b.at(3, 4) == 1);
  CHECK(b.at(5, 6) == 0);
  CHECK_THROWS_AS(binarize(f, 0), DomainError);
  CHECK_THROWS_AS(binarize(f, 256), DomainError);
}

TEST_CASE("binarization is pixel-wise and idempotent") {
  FrameImage f(40, 30);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) f.set(x, y, static_cast<std::uint8_t>((x * 37 + y * 11) % 256));
  for (int lambda : {1, 50, 128, 200, 255}) {
    const BinaryImage b = binarize(f, lambda);
    FrameImage again(40, 30);
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) {
        CHECK(b.at(x, y) == (f.at(x, y) >= lambda ? 1 : 0));
        again.set(x, y, b.at(x, y) ? 255 : 0);
      }
    CHECK(binarize(again, lambda).bits == b.bits);
  }
}

TEST_CASE("centroid of simple shapes") {
  FrameImage f(32, 32);
  f.set(10, 20, 255);
  CHECK(measured(f) == PixelCoord{10.0, 20.0});
  CHECK_THROWS_AS(centroid(binarize(FrameImage(32, 32), 128)), TargetLostError);
  const PixelCoord c = measured(render_disk(64, 64, {32.0, 32.0}, 5.0));
  CHECK(std::abs(c.x - 32) <= 0.5);
  CHECK(std::abs(c.y - 32) <= 0.5);
}

TEST_CASE("centroid error stays below half a pixel for disks anywhere in frame") {
  for (double r : {5.0, 6.3, 9.0, 14.5})
    for (double cx = r; cx <= 100 - r; cx += 7.37)
      for (double cy = r; cy <= 80 - r; cy += 9.13) {
        const PixelCoord c = measured(render_disk(100, 80, {cx, cy}, r));
        CHECK(std::hypot(c.x - cx, c.y - cy) <= 0.5);
      }
}

TEST_CASE("pixel velocity and world scaling") {
  CHECK(pixel_velocity({5, 5}, {5, 5}, 30) == Vec2{0, 0});
  const Vec2 v = pixel_velocity({0, 0}, {3, -4}, 30);
  CHECK(v.u == doctest::Approx(90));
  CHECK(v.v == doctest::Approx(-120));
  const Vec2 v2 = pixel_velocity({0, 0}, {6, -8}, 30);
  CHECK(v2.u == 2 * v.u);
  CHECK(v2.v == 2 * v.v);
  const Vec2 w = to_world({100, 0}, 5e-4);
  CHECK(w.u == doctest::Approx(0.05));
  CHECK(w.v == 0.0);
  CHECK(to_world({0, 0}, 5e-4) == Vec2{0, 0});
}

TEST_CASE("constant-velocity motion is recovered within 2 %") {
  const Camera cam;
  const Calibration cal = calibrate_camera(cam, 0.01);
  Tracker t(cal, {30.0, 128, {0, 0}, Tracker::Mode::absolute});
  const Vec2 speed{0.03, -0.012};
  for (int k = 0; k < 10; ++k) {
    t.step(render_frame(speed * (k / 30.0), cam));
    if (k > 0) {
      CHECK(t.velocity().u == doctest::Approx(speed.u).epsilon(0.02));
      CHECK(t.velocity().v == doctest::Approx(speed.v).epsilon(0.02));
    }
  }
}

TEST_CASE("beta calibration") {
  const Calibration c = calibrate_beta(0.3, 0.01, 20);
  CHECK(c.beta == doctest::Approx(5e-4));
  CHECK(c.distance_m == 0.3);
  CHECK_THROWS_AS(calibrate_beta(0.3, 0.01, 0), CalibrationError);
  CHECK_THROWS_AS(calibrate_beta(0.3, 0.01, 0.5), CalibrationError);

  Camera near;
  Camera far = near;
  far.distance_m = 2 * near.distance_m;
  const Calibration a = calibrate_camera(near, 0.01);
  const Calibration b = calibrate_camera(far, 0.02);
  CHECK(a.beta == doctest::Approx(near.beta()).epsilon(0.02));
  CHECK(b.beta == doctest::Approx(2 * a.beta).epsilon(0.02));
}

TEST_CASE("tracker steers the beam to the membrane") {
  const Camera cam;
  const Calibration cal = calibrate_camera(cam, 0.01);
  const Vec2 offset{0, 0.015};
  Tracker t(cal, {30.0, 128, offset, Tracker::Mode::absolute});
  const GalvoCommand c0 = t.step(render_frame({0, 0}, cam));
  CHECK_FALSE(c0.lost);
  CHECK((c0.beam_target - offset).norm() <= 0.5 * cal.beta);

  const GalvoCommand c1 = t.step(render_frame({0.01, 0}, cam));
  CHECK((c1.beam_target - c0.beam_target).u == doctest::Approx(0.01).epsilon(0.02));

  const GalvoCommand lost = t.step(FrameImage(cam.width, cam.height));
  CHECK(lost.lost);
  CHECK(lost.beam_target == c1.beam_target);
  CHECK(t.previous_centroid().has_value());
}

TEST_CASE("velocity mode integrates the measured motion") {
  const Camera cam;
  const Calibration cal = calibrate_camera(cam, 0.01);
  Tracker t(cal, {30.0, 128, {0, 0.015}, Tracker::Mode::velocity});
  Vec2 last;
  for (int k = 0; k < 30; ++k) {
    const Vec2 marker{0.02 * std::sin(k / 30.0), 0.0};
    last = t.step(render_frame(marker, cam)).beam_target;
    CHECK((last - (marker + Vec2{0, 0.015})).norm() <= 2 * cal.beta);
  }
}

TEST_CASE("tracker rejects invalid calibration") {
  CHECK_THROWS_AS(Tracker({0.0, 0.3}, {}), DomainError);
  Tracker::Options bad;
  bad.frame_rate = 0;
  CHECK_THROWS_AS(Tracker({1e-3, 0.3}, bad), DomainError);
}

TEST_CASE("frames dump as binary PGM") {
  const auto p = std::filesystem::temp_directory_path() / "vanc_test_frame.pgm";
  const FrameImage f = render_disk(20, 16, {10, 8}, 3);
  write_pgm(p, f);
  std::ifstream in(p, std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  in.get();
  CHECK(magic == "P5");
  CHECK(w == 20);
  CHECK(h == 16);
  CHECK(maxv == 255);
  std::vector<char> data(320);
  in.read(data.data(), 320);
  CHECK(in.gcount() == 320);
  CHECK(static_cast<unsigned char>(data[8 * 20 + 10]) == 255);
}
