#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "ecgdig/edgeline.hpp"

using namespace ecgdig;

namespace {

// Dark grid on a light sheet, the texture rotation estimation feeds on.
// Lines are two pixels wide, like grid rules on a full-resolution scan.
GrayImage grid_sheet(int w, int h, int pitch) {
  GrayImage img = GrayImage::filled(w, h, 245);
  for (int y = 0; y < h; y += pitch)
    for (int x = 0; x < w; ++x) {
      img.at(x, y) = 40;
      if (y + 1 < h) img.at(x, y + 1) = 40;
    }
  for (int x = 0; x < w; x += pitch)
    for (int y = 0; y < h; ++y) {
      img.at(x, y) = 40;
      if (x + 1 < w) img.at(x + 1, y) = 40;
    }
  return img;
}

HoughConfig test_hough() {
  HoughConfig cfg;
  cfg.vote_threshold = 20;
  cfg.min_length = 40.0;
  cfg.max_gap = 4.0;
  return cfg;
}

double mean_abs_diff_center(const GrayImage& a, const GrayImage& b) {
  double acc = 0.0;
  int n = 0;
  for (int y = a.height / 4; y < 3 * a.height / 4; ++y) {
    for (int x = a.width / 4; x < 3 * a.width / 4; ++x) {
      acc += std::abs(static_cast<int>(a.at(x, y)) - static_cast<int>(b.at(x, y)));
      ++n;
    }
  }
  return acc / n;
}

}  // namespace

TEST_CASE("auto thresholds follow the median rule") {
  auto [low, high] = canny_auto_thresholds(128.0, 0.33);
  CHECK(low == 85);   // trunc(0.67 * 128)
  CHECK(high == 170); // trunc(1.33 * 128)

  auto [low2, high2] = canny_auto_thresholds(250.0, 0.33);
  CHECK(low2 == 167);
  CHECK(high2 == 255);  // clamped

  CHECK_THROWS_AS(canny_auto_thresholds(128.0, 1.5), std::invalid_argument);
}

TEST_CASE("constant image produces an empty edge map") {
  GrayImage img = GrayImage::filled(64, 64, 180);
  EdgeMap edges = canny_auto(img);
  CHECK(edges.foreground_count() == 0);
}

TEST_CASE("vertical step edge localizes within one pixel") {
  GrayImage img = GrayImage::filled(40, 40, 0);
  for (int y = 0; y < 40; ++y)
    for (int x = 20; x < 40; ++x) img.at(x, y) = 255;
  EdgeMap edges = canny_auto(img);
  std::size_t count = 0;
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      if (!edges.at(x, y)) continue;
      ++count;
      CHECK(x >= 19);
      CHECK(x <= 20);
    }
  }
  CHECK(count >= 20);  // the edge runs the full image height
}

TEST_CASE("weak gradients without a strong anchor are dropped") {
  // A shallow ramp whose gradient lands between the two thresholds, far from
  // any strong edge: hysteresis must not emit it.
  GrayImage img = GrayImage::filled(80, 40, 128);
  for (int y = 4; y < 16; ++y)
    for (int x = 8; x < 20; ++x) img.at(x, y) = static_cast<std::uint8_t>(128 + (x - 14) * 4);
  // Strong step in the lower half, well separated.
  for (int y = 28; y < 40; ++y)
    for (int x = 40; x < 80; ++x) img.at(x, y) = 250;
  EdgeMap edges = canny_auto(img);
  std::size_t ramp_edges = 0;
  std::size_t strong_edges = 0;
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 80; ++x) {
      if (!edges.at(x, y)) continue;
      if (y < 20 && x < 26) ++ramp_edges;
      if (y > 24) ++strong_edges;
    }
  }
  CHECK(ramp_edges == 0);
  CHECK(strong_edges > 0);
}

TEST_CASE("line transform recovers a horizontal line") {
  GrayImage img = GrayImage::filled(200, 200, 255);
  for (int x = 20; x < 180; ++x) {
    img.at(x, 50) = 0;
    img.at(x, 51) = 0;
  }
  EdgeMap edges = canny_auto(img);
  auto segments = hough_probabilistic(edges, test_hough(), 7);
  REQUIRE_FALSE(segments.empty());
  bool found_flat = false;
  for (const auto& s : segments) {
    double dx = s.x2 - s.x1;
    double dy = s.y2 - s.y1;
    if (std::abs(dx) < 1.0) continue;
    if (std::abs(dy / dx) < std::tan(0.5 * std::numbers::pi / 180.0)) found_flat = true;
  }
  CHECK(found_flat);
}

TEST_CASE("line transform recovers a 10-degree line within a degree") {
  GrayImage img = GrayImage::filled(200, 200, 255);
  const double slope = std::tan(10.0 * std::numbers::pi / 180.0);
  for (int x = 10; x < 190; ++x) {
    int y = static_cast<int>(std::lround(30 + slope * (x - 10)));
    img.at(x, y) = 0;
    img.at(x, y + 1) = 0;
  }
  EdgeMap edges = canny_auto(img);
  auto segments = hough_probabilistic(edges, test_hough(), 11);
  REQUIRE_FALSE(segments.empty());
  bool close = false;
  for (const auto& s : segments) {
    double ang = std::atan2(static_cast<double>(s.y2 - s.y1),
                            static_cast<double>(s.x2 - s.x1)) * 180.0 / std::numbers::pi;
    if (ang > 90.0) ang -= 180.0;  // endpoint order is irrelevant to the angle
    if (ang <= -90.0) ang += 180.0;
    if (std::abs(ang - 10.0) <= 1.0) close = true;
  }
  CHECK(close);
}

TEST_CASE("line transform is deterministic for a fixed seed") {
  GrayImage img = grid_sheet(220, 160, 20);
  EdgeMap edges = canny_auto(img);
  auto a = hough_probabilistic(edges, test_hough(), 99);
  auto b = hough_probabilistic(edges, test_hough(), 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x1 == b[i].x1);
    CHECK(a[i].y1 == b[i].y1);
    CHECK(a[i].x2 == b[i].x2);
    CHECK(a[i].y2 == b[i].y2);
    CHECK(a[i].votes == b[i].votes);
  }
}

TEST_CASE("rotation estimate is zero with a warning on featureless input") {
  GrayImage img = GrayImage::filled(120, 120, 200);
  RotationEstimate est = estimate_rotation(img, test_hough());
  CHECK(est.degrees == 0.0);
  CHECK_FALSE(est.lines_found);
}

TEST_CASE("rotation estimate recovers an applied skew") {
  GrayImage sheet = grid_sheet(320, 240, 24);
  for (double angle : {-6.0, -3.0, 3.0, 7.0}) {
    GrayImage rotated = rotate(sheet, angle);
    RotationEstimate est = estimate_rotation(rotated, test_hough());
    REQUIRE(est.lines_found);
    CHECK(std::abs(est.degrees - angle) <= 1.0);
    // Correcting by the estimate reaches a fixed point: the deskewed sheet
    // re-estimates as level.
    GrayImage leveled = rotate(rotated, -est.degrees);
    RotationEstimate residual = estimate_rotation(leveled, test_hough());
    REQUIRE(residual.lines_found);
    CHECK(std::abs(residual.degrees) <= 0.2);
  }
}

TEST_CASE("rotation estimate ignores uniform intensity scaling") {
  GrayImage sheet = rotate(grid_sheet(320, 240, 24), 4.0);
  RotationEstimate base = estimate_rotation(sheet, test_hough());
  GrayImage dimmed = sheet;
  for (auto& p : dimmed.pixels)
    p = static_cast<std::uint8_t>(std::lround(p * 0.85));
  RotationEstimate scaled = estimate_rotation(dimmed, test_hough());
  REQUIRE(base.lines_found);
  REQUIRE(scaled.lines_found);
  CHECK(std::abs(base.degrees - scaled.degrees) <= 0.5);
}

TEST_CASE("rotate by zero is a bit-exact identity") {
  std::mt19937_64 rng(3);
  GrayImage img = GrayImage::filled(33, 27, 0);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(d(rng));
  GrayImage out = rotate(img, 0.0);
  CHECK(out.pixels == img.pixels);
}

TEST_CASE("rotate round trip approximately restores the interior") {
  GrayImage sheet = grid_sheet(240, 200, 20);
  GrayImage there = rotate(sheet, 5.0);
  GrayImage back = rotate(there, -5.0);
  CHECK(mean_abs_diff_center(sheet, back) < 14.0);
}

TEST_CASE("rotate rejects angles at or beyond 90 degrees") {
  GrayImage img = GrayImage::filled(10, 10, 0);
  CHECK_THROWS_AS(rotate(img, 95.0), std::invalid_argument);
  CHECK_THROWS_AS(rotate(img, -90.0), std::invalid_argument);
}
