#include "ecgdig/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ecgdig {

namespace {

void require_nonempty(int w, int h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("zero-dimension image");
}

void require_odd_window(int n, const char* what) {
  if (n < 1 || n % 2 == 0)
    throw std::invalid_argument(std::string(what) + " must be a positive odd number");
}

int clamp_coord(int v, int hi) { return std::clamp(v, 0, hi - 1); }

std::uint8_t clamp_round_u8(double v) {
  double r = std::floor(v + 0.5);  // round half up, negatives clamp anyway
  if (r < 0.0) return 0;
  if (r > 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

// Fractional coverage of one output cell over the source axis: list of
// (source index, weight) pairs whose weights sum to the cell span.
struct AxisCoverage {
  std::vector<int> first;          // first source index per output index
  std::vector<std::vector<double>> weights;
};

AxisCoverage axis_coverage(int in_dim, int out_dim) {
  AxisCoverage cov;
  cov.first.resize(out_dim);
  cov.weights.resize(out_dim);
  const double span = static_cast<double>(in_dim) / out_dim;
  for (int o = 0; o < out_dim; ++o) {
    double lo = o * span;
    double hi = (o + 1) * span;
    if (o == out_dim - 1) hi = in_dim;  // guard against roundoff at the end
    int i0 = static_cast<int>(std::floor(lo));
    int i1 = static_cast<int>(std::ceil(hi));
    i1 = std::min(i1, in_dim);
    cov.first[o] = i0;
    auto& w = cov.weights[o];
    for (int i = i0; i < i1; ++i) {
      double a = std::max(lo, static_cast<double>(i));
      double b = std::min(hi, static_cast<double>(i + 1));
      w.push_back(std::max(0.0, b - a));
    }
  }
  return cov;
}

}  // namespace

GrayImage GrayImage::filled(int w, int h, std::uint8_t value) {
  require_nonempty(w, h);
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<std::size_t>(w) * h, value);
  return img;
}

RgbImage RgbImage::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  require_nonempty(w, h);
  RgbImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(3 * static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

BinaryImage BinaryImage::filled(int w, int h, std::uint8_t value) {
  require_nonempty(w, h);
  if (value > 1) throw std::invalid_argument("binary pixel must be 0 or 1");
  BinaryImage img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<std::size_t>(w) * h, value);
  return img;
}

std::size_t BinaryImage::foreground_count() const {
  return static_cast<std::size_t>(
      std::count(pixels.begin(), pixels.end(), std::uint8_t{1}));
}

Kernel Kernel::identity(int size) {
  require_odd_window(size, "kernel size");
  Kernel k;
  k.size = size;
  k.weights.assign(static_cast<std::size_t>(size) * size, 0.0);
  k.weights[static_cast<std::size_t>(size) * (size / 2) + size / 2] = 1.0;
  return k;
}

Kernel Kernel::box(int size) {
  require_odd_window(size, "kernel size");
  Kernel k;
  k.size = size;
  k.weights.assign(static_cast<std::size_t>(size) * size,
                   1.0 / (static_cast<double>(size) * size));
  return k;
}

Kernel Kernel::gaussian(int size, double sigma) {
  require_odd_window(size, "kernel size");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  Kernel k;
  k.size = size;
  k.weights.resize(static_cast<std::size_t>(size) * size);
  const int r = size / 2;
  double sum = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      double w = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      k.weights[static_cast<std::size_t>(y + r) * size + (x + r)] = w;
      sum += w;
    }
  }
  for (double& w : k.weights) w /= sum;
  return k;
}

Kernel Kernel::sharpen3x3() {
  Kernel k;
  k.size = 3;
  k.weights = {-1, -1, -1, -1, 9, -1, -1, -1, -1};
  return k;
}

GrayImage to_grayscale(const RgbImage& rgb) {
  require_nonempty(rgb.width, rgb.height);
  GrayImage out;
  out.width = rgb.width;
  out.height = rgb.height;
  out.pixels.resize(static_cast<std::size_t>(rgb.width) * rgb.height);
  const std::uint8_t* src = rgb.pixels.data();
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    out.pixels[i] = clamp_round_u8(y);
  }
  return out;
}

GrayImage downsample_area(const GrayImage& img, int factor) {
  require_nonempty(img.width, img.height);
  if (factor < 1) throw std::invalid_argument("downsample factor must be >= 1");
  // Nearest integer with ties to even, matching typical resize conventions.
  int out_w = std::max(1, static_cast<int>(std::nearbyint(
                              static_cast<double>(img.width) / factor)));
  int out_h = std::max(1, static_cast<int>(std::nearbyint(
                              static_cast<double>(img.height) / factor)));
  AxisCoverage cx = axis_coverage(img.width, out_w);
  AxisCoverage cy = axis_coverage(img.height, out_h);

  GrayImage out;
  out.width = out_w;
  out.height = out_h;
  out.pixels.resize(static_cast<std::size_t>(out_w) * out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    const auto& wy = cy.weights[oy];
    const int y0 = cy.first[oy];
    for (int ox = 0; ox < out_w; ++ox) {
      const auto& wx = cx.weights[ox];
      const int x0 = cx.first[ox];
      double acc = 0.0;
      double area = 0.0;
      for (std::size_t j = 0; j < wy.size(); ++j) {
        const std::uint8_t* row = &img.pixels[static_cast<std::size_t>(y0 + j) * img.width];
        double racc = 0.0;
        for (std::size_t i = 0; i < wx.size(); ++i)
          racc += wx[i] * row[x0 + i];
        acc += wy[j] * racc;
        area += wy[j] * std::accumulate(wx.begin(), wx.end(), 0.0);
      }
      out.at(ox, oy) = clamp_round_u8(acc / area);
    }
  }
  return out;
}

GrayImage convolve(const GrayImage& img, const Kernel& kernel) {
  require_nonempty(img.width, img.height);
  require_odd_window(kernel.size, "kernel size");
  if (kernel.size > std::min(img.width, img.height))
    throw std::invalid_argument("kernel larger than image");
  if (kernel.weights.size() != static_cast<std::size_t>(kernel.size) * kernel.size)
    throw std::invalid_argument("kernel weight count does not match size");

  const int r = kernel.size / 2;
  GrayImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int ky = -r; ky <= r; ++ky) {
        const int sy = clamp_coord(y + ky, img.height);
        for (int kx = -r; kx <= r; ++kx) {
          const int sx = clamp_coord(x + kx, img.width);
          // True convolution: kernel indices run opposite the image offsets.
          acc += kernel.weights[static_cast<std::size_t>(r - ky) * kernel.size + (r - kx)] *
                 img.at(sx, sy);
        }
      }
      out.at(x, y) = clamp_round_u8(acc);
    }
  }
  return out;
}

GrayImage median_filter(const GrayImage& img, int window) {
  require_nonempty(img.width, img.height);
  require_odd_window(window, "median window");

  const int r = window / 2;
  GrayImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(window) * window);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      std::size_t n = 0;
      for (int ky = -r; ky <= r; ++ky) {
        const int sy = clamp_coord(y + ky, img.height);
        for (int kx = -r; kx <= r; ++kx)
          buf[n++] = img.at(clamp_coord(x + kx, img.width), sy);
      }
      auto mid = buf.begin() + n / 2;
      std::nth_element(buf.begin(), mid, buf.begin() + n);
      out.at(x, y) = *mid;
    }
  }
  return out;
}

BinaryImage threshold(const GrayImage& img, int t, bool inverted) {
  require_nonempty(img.width, img.height);
  if (t < 0 || t > 255) throw std::invalid_argument("threshold must lie in [0, 255]");
  BinaryImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    bool on = img.pixels[i] >= t;
    out.pixels[i] = static_cast<std::uint8_t>(inverted ? !on : on);
  }
  return out;
}

namespace {

// Shared window-count pass for binary morphology: a pixel turns on when the
// number of set pixels in its (edge-replicated) window reaches min_count.
BinaryImage count_threshold(const BinaryImage& img, int s, int min_count) {
  require_nonempty(img.width, img.height);
  require_odd_window(s, "structuring element size");
  const int r = s / 2;
  BinaryImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      int count = 0;
      for (int ky = -r; ky <= r; ++ky) {
        const int sy = clamp_coord(y + ky, img.height);
        for (int kx = -r; kx <= r; ++kx)
          count += img.at(clamp_coord(x + kx, img.width), sy);
      }
      out.at(x, y) = static_cast<std::uint8_t>(count >= min_count);
    }
  }
  return out;
}

}  // namespace

BinaryImage dilate(const BinaryImage& img, int s) { return count_threshold(img, s, 1); }

BinaryImage erode(const BinaryImage& img, int s) { return count_threshold(img, s, s * s); }

BinaryImage morphological_close(const BinaryImage& img, int s) {
  return erode(dilate(img, s), s);
}

GrayImage gray_from_binary(const BinaryImage& img, std::uint8_t foreground,
                           std::uint8_t background) {
  require_nonempty(img.width, img.height);
  GrayImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    out.pixels[i] = img.pixels[i] ? foreground : background;
  return out;
}

}  // namespace ecgdig
