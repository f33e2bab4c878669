#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ecgdig {

// 8-bit single-channel image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  static GrayImage filled(int w, int h, std::uint8_t value);

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  bool empty() const { return width <= 0 || height <= 0; }
};

// 8-bit three-channel image, row-major, interleaved RGB.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  static RgbImage filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  std::uint8_t* at(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  bool empty() const { return width <= 0 || height <= 0; }
};

// Binary mask, row-major, values restricted to {0, 1}.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  static BinaryImage filled(int w, int h, std::uint8_t value);

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t foreground_count() const;
};

// Square convolution kernel with odd side length.
struct Kernel {
  int size = 1;
  std::vector<double> weights;  // size * size, row-major

  static Kernel identity(int size);
  static Kernel box(int size);
  static Kernel gaussian(int size, double sigma);
  // Classic 3x3 high-boost sharpening kernel (center 9, neighbours -1).
  static Kernel sharpen3x3();
};

// BT.601 luminance: round(0.299 R + 0.587 G + 0.114 B).
GrayImage to_grayscale(const RgbImage& rgb);

// Area-weighted mean downsampling by an integer factor. Output dimensions are
// dim/factor rounded to the nearest integer (ties to even); each output pixel
// averages the source pixels its fractional footprint covers.
GrayImage downsample_area(const GrayImage& img, int factor);

// Spatial convolution (kernel flipped) with edge replication at the borders.
// Results are rounded and clamped to [0, 255].
GrayImage convolve(const GrayImage& img, const Kernel& kernel);

// Median over an odd square window with edge replication.
GrayImage median_filter(const GrayImage& img, int window);

// Fixed binarization: pixel >= t maps to 1. The inverted variant maps
// pixel < t to 1 so that dark ink becomes foreground.
BinaryImage threshold(const GrayImage& img, int t, bool inverted);

// Binary morphology over an s x s all-ones structuring element (odd s) with
// edge replication. Dilation marks a pixel when any window pixel is set;
// erosion requires the full window. Closing is erode(dilate(img)).
BinaryImage dilate(const BinaryImage& img, int s);
BinaryImage erode(const BinaryImage& img, int s);
BinaryImage morphological_close(const BinaryImage& img, int s);

// Renders a mask back to grayscale with chosen foreground/background levels.
GrayImage gray_from_binary(const BinaryImage& img, std::uint8_t foreground,
                           std::uint8_t background);

}  // namespace ecgdig
