#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "ecgdig/pgm.hpp"
#include "ecgdig/raster.hpp"

using namespace ecgdig;

namespace {

GrayImage random_gray(int w, int h, std::mt19937_64& rng) {
  GrayImage img = GrayImage::filled(w, h, 0);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(d(rng));
  return img;
}

BinaryImage random_mask(int w, int h, double density, std::mt19937_64& rng) {
  BinaryImage img = BinaryImage::filled(w, h, 0);
  std::bernoulli_distribution d(density);
  for (auto& p : img.pixels) p = d(rng) ? 1 : 0;
  return img;
}

double mean_intensity(const GrayImage& img) {
  double s = 0.0;
  for (auto p : img.pixels) s += p;
  return s / static_cast<double>(img.pixels.size());
}

}  // namespace

TEST_CASE("to_grayscale uses BT.601 luminance weights") {
  RgbImage red = RgbImage::filled(2, 2, 255, 0, 0);
  GrayImage g = to_grayscale(red);
  for (auto p : g.pixels) CHECK(p == 76);  // round(0.299 * 255)

  RgbImage white = RgbImage::filled(3, 1, 255, 255, 255);
  for (auto p : to_grayscale(white).pixels) CHECK(p == 255);

  RgbImage green = RgbImage::filled(1, 1, 0, 255, 0);
  CHECK(to_grayscale(green).pixels[0] == 150);  // round(0.587 * 255) = round(149.685)
}

TEST_CASE("to_grayscale rejects zero-dimension input") {
  RgbImage bad;
  CHECK_THROWS_AS(to_grayscale(bad), std::invalid_argument);
}

TEST_CASE("downsample_area dimension rounding matches known scan sizes") {
  struct Case {
    int w, h, factor, out_w, out_h;
  };
  // Nearest-int dimension rounding with ties to even: 2834/4 = 708.5 -> 708.
  const Case cases[] = {
      {2834, 5313, 4, 708, 1328},
      {2375, 4167, 4, 594, 1042},
      {3910, 5875, 8, 489, 734},
  };
  for (const auto& c : cases) {
    GrayImage img = GrayImage::filled(c.w, c.h, 200);
    GrayImage out = downsample_area(img, c.factor);
    CHECK(out.width == c.out_w);
    CHECK(out.height == c.out_h);
  }
}

TEST_CASE("downsample_area of a constant image is constant") {
  GrayImage img = GrayImage::filled(97, 53, 131);
  for (int factor : {2, 3, 4, 8}) {
    GrayImage out = downsample_area(img, factor);
    for (auto p : out.pixels) CHECK(p == 131);
  }
}

TEST_CASE("downsample_area preserves global mean for divisible dimensions") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    GrayImage img = random_gray(64, 48, rng);
    GrayImage out = downsample_area(img, 4);
    CHECK(out.width == 16);
    CHECK(out.height == 12);
    CHECK(std::abs(mean_intensity(out) - mean_intensity(img)) <= 1.0);
  }
}

TEST_CASE("downsample_area validates inputs") {
  GrayImage img = GrayImage::filled(8, 8, 0);
  CHECK_THROWS_AS(downsample_area(img, 0), std::invalid_argument);
  GrayImage empty;
  CHECK_THROWS_AS(downsample_area(empty, 2), std::invalid_argument);
}

TEST_CASE("convolve with identity kernel returns the input") {
  std::mt19937_64 rng(7);
  GrayImage img = random_gray(20, 15, rng);
  GrayImage out = convolve(img, Kernel::identity(3));
  CHECK(out.pixels == img.pixels);
}

TEST_CASE("convolve box blur spreads a bright pixel") {
  GrayImage img = GrayImage::filled(7, 7, 0);
  img.at(3, 3) = 255;
  GrayImage out = convolve(img, Kernel::box(3));
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 7; ++x) {
      if (std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1)
        CHECK(out.at(x, y) == 28);  // round(255 / 9)
      else
        CHECK(out.at(x, y) == 0);
    }
  }
}

TEST_CASE("convolve clamps results to [0, 255]") {
  GrayImage img = GrayImage::filled(5, 5, 200);
  img.at(2, 2) = 255;
  GrayImage out = convolve(img, Kernel::sharpen3x3());
  for (auto p : out.pixels) CHECK(p <= 255);
  // Center: 9*255 - 8*200 = 695 -> clamped.
  CHECK(out.at(2, 2) == 255);
}

TEST_CASE("convolve rejects kernels larger than the image") {
  GrayImage img = GrayImage::filled(2, 2, 0);
  CHECK_THROWS_AS(convolve(img, Kernel::box(3)), std::invalid_argument);
}

TEST_CASE("median_filter removes isolated salt noise") {
  GrayImage img = GrayImage::filled(5, 1, 0);
  img.at(2, 0) = 255;
  GrayImage out = median_filter(img, 3);
  CHECK(out.at(2, 0) == 0);
}

TEST_CASE("median_filter matches a brute-force oracle") {
  std::mt19937_64 rng(99);
  GrayImage img = random_gray(17, 13, rng);
  for (int window : {3, 5}) {
    GrayImage out = median_filter(img, window);
    const int r = window / 2;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        std::vector<int> vals;
        for (int ky = -r; ky <= r; ++ky) {
          for (int kx = -r; kx <= r; ++kx) {
            int sx = std::clamp(x + kx, 0, img.width - 1);
            int sy = std::clamp(y + ky, 0, img.height - 1);
            vals.push_back(img.at(sx, sy));
          }
        }
        std::sort(vals.begin(), vals.end());
        CHECK(out.at(x, y) == vals[vals.size() / 2]);
      }
    }
  }
}

TEST_CASE("median_filter requires an odd window") {
  GrayImage img = GrayImage::filled(5, 5, 0);
  CHECK_THROWS_AS(median_filter(img, 4), std::invalid_argument);
}

TEST_CASE("threshold maps intensities by >= t, inverted flips") {
  GrayImage img = GrayImage::filled(2, 1, 0);
  img.at(0, 0) = 10;
  img.at(1, 0) = 200;
  BinaryImage plain = threshold(img, 128, false);
  CHECK(plain.at(0, 0) == 0);
  CHECK(plain.at(1, 0) == 1);
  BinaryImage inv = threshold(img, 128, true);
  CHECK(inv.at(0, 0) == 1);
  CHECK(inv.at(1, 0) == 0);

  BinaryImage all = threshold(img, 0, false);
  CHECK(all.foreground_count() == 2);
}

TEST_CASE("threshold rejects out-of-range cutoffs") {
  GrayImage img = GrayImage::filled(2, 2, 0);
  CHECK_THROWS_AS(threshold(img, 256, false), std::invalid_argument);
  CHECK_THROWS_AS(threshold(img, -1, false), std::invalid_argument);
}

TEST_CASE("re-binarizing a rendered mask is a fixed point") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> tdist(1, 254);
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage img = random_gray(12, 9, rng);
    int t = tdist(rng);
    for (bool inverted : {false, true}) {
      BinaryImage b = threshold(img, t, inverted);
      // Render foreground back at the intensity the mode selects for ink.
      GrayImage rendered = inverted ? gray_from_binary(b, 0, 255)
                                    : gray_from_binary(b, 255, 0);
      BinaryImage again = threshold(rendered, t, inverted);
      CHECK(again.pixels == b.pixels);
    }
  }
}

TEST_CASE("morphological_close bridges a one-pixel gap") {
  BinaryImage img = BinaryImage::filled(9, 3, 0);
  for (int x = 0; x < 9; ++x) img.at(x, 1) = 1;
  img.at(4, 1) = 0;
  BinaryImage out = morphological_close(img, 3);
  CHECK(out.at(4, 1) == 1);
}

TEST_CASE("morphological_close leaves a solid rectangle unchanged") {
  BinaryImage img = BinaryImage::filled(12, 10, 0);
  for (int y = 2; y < 8; ++y)
    for (int x = 3; x < 10; ++x) img.at(x, y) = 1;
  BinaryImage out = morphological_close(img, 3);
  CHECK(out.pixels == img.pixels);
}

TEST_CASE("closing never removes foreground") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    BinaryImage img = random_mask(24, 18, 0.3, rng);
    BinaryImage out = morphological_close(img, 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
      if (img.pixels[i]) CHECK(out.pixels[i] == 1);
  }
}

TEST_CASE("dilate grows and erode shrinks") {
  std::mt19937_64 rng(31);
  BinaryImage img = random_mask(20, 20, 0.4, rng);
  BinaryImage grown = dilate(img, 3);
  BinaryImage shrunk = erode(img, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.pixels[i]) CHECK(grown.pixels[i] == 1);
    if (shrunk.pixels[i]) CHECK(img.pixels[i] == 1);
  }
}

TEST_CASE("pgm round trip preserves pixels exactly") {
  std::mt19937_64 rng(11);
  GrayImage img = random_gray(33, 21, rng);
  auto path = (std::filesystem::temp_directory_path() / "ecgdig_test_roundtrip.pgm").string();
  write_pgm(path, img);
  GrayImage back = read_pgm(path);
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.pixels == img.pixels);
  std::remove(path.c_str());
}

TEST_CASE("pgm reader accepts comments and rejects malformed files") {
  auto dir = std::filesystem::temp_directory_path();
  auto ok_path = (dir / "ecgdig_test_comment.pgm").string();
  {
    std::ofstream out(ok_path, std::ios::binary);
    out << "P5\n# a scanner comment\n2 1\n255\n";
    out.put(7);
    out.put(9);
  }
  GrayImage img = read_pgm(ok_path);
  CHECK(img.width == 2);
  CHECK(img.at(0, 0) == 7);
  CHECK(img.at(1, 0) == 9);
  std::remove(ok_path.c_str());

  auto bad_path = (dir / "ecgdig_test_bad.pgm").string();
  {
    std::ofstream out(bad_path, std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.put(1);  // payload far too short
  }
  CHECK_THROWS_AS(read_pgm(bad_path), std::runtime_error);
  std::remove(bad_path.c_str());

  auto ascii_path = (dir / "ecgdig_test_ascii.pgm").string();
  {
    std::ofstream out(ascii_path, std::ios::binary);
    out << "P2\n2 2\n255\n0 0 0 0\n";
  }
  CHECK_THROWS_AS(read_pgm(ascii_path), std::runtime_error);
  std::remove(ascii_path.c_str());
}

TEST_CASE("ppm round trip preserves pixels exactly") {
  RgbImage img = RgbImage::filled(5, 4, 10, 20, 30);
  img.at(2, 1)[0] = 200;
  auto path = (std::filesystem::temp_directory_path() / "ecgdig_test_rgb.ppm").string();
  write_ppm(path, img);
  RgbImage back = read_ppm(path);
  CHECK(back.pixels == img.pixels);
  std::remove(path.c_str());
}
