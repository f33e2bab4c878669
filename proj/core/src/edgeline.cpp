#include "ecgdig/edgeline.hpp"

#include <algorithm>

#include "ecgdig/geometry.hpp"
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ecgdig {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Exact median of 8-bit intensities via histogram, averaging the two middle
// values for even pixel counts.
double intensity_median(const GrayImage& img) {
  std::size_t hist[256] = {};
  for (auto p : img.pixels) ++hist[p];
  const std::size_t n = img.pixels.size();
  auto value_at = [&](std::size_t rank) {
    std::size_t seen = 0;
    for (int v = 0; v < 256; ++v) {
      seen += hist[v];
      if (seen > rank) return v;
    }
    return 255;
  };
  const std::size_t lower = (n - 1) / 2;
  const std::size_t upper = n / 2;
  return (value_at(lower) + value_at(upper)) / 2.0;
}

struct Gradients {
  std::vector<double> magnitude;
  std::vector<std::uint8_t> direction_bin;  // 0: E-W, 1: SE-NW, 2: S-N, 3: SW-NE
};

Gradients sobel_gradients(const GrayImage& img) {
  const int w = img.width;
  const int h = img.height;
  Gradients g;
  g.magnitude.assign(static_cast<std::size_t>(w) * h, 0.0);
  g.direction_bin.assign(static_cast<std::size_t>(w) * h, 0);
  auto px = [&](int x, int y) {
    return static_cast<int>(img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int gx = -px(x - 1, y - 1) + px(x + 1, y - 1) - 2 * px(x - 1, y) +
                     2 * px(x + 1, y) - px(x - 1, y + 1) + px(x + 1, y + 1);
      const int gy = -px(x - 1, y - 1) - 2 * px(x, y - 1) - px(x + 1, y - 1) +
                     px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      g.magnitude[i] = std::hypot(static_cast<double>(gx), static_cast<double>(gy));
      double angle = std::atan2(static_cast<double>(gy), static_cast<double>(gx)) / kDegToRad;
      angle = std::fmod(angle + 180.0, 180.0);  // fold opposite directions together
      g.direction_bin[i] = static_cast<std::uint8_t>(
          static_cast<int>(std::lround(angle / 45.0)) % 4);
    }
  }
  return g;
}

}  // namespace

std::pair<int, int> canny_auto_thresholds(double median_intensity, double sigma_fraction) {
  if (!(sigma_fraction >= 0.0 && sigma_fraction < 1.0))
    throw std::invalid_argument("sigma fraction must lie in [0, 1)");
  const int low = static_cast<int>(std::max(0.0, (1.0 - sigma_fraction) * median_intensity));
  const int high = static_cast<int>(std::min(255.0, (1.0 + sigma_fraction) * median_intensity));
  return {low, high};
}

EdgeMap canny_auto(const GrayImage& img, double sigma_fraction) {
  if (img.empty()) throw std::invalid_argument("zero-dimension image");
  const auto [low, high] = canny_auto_thresholds(intensity_median(img), sigma_fraction);

  const GrayImage smoothed = convolve(img, Kernel::gaussian(5, 1.4));
  const Gradients grad = sobel_gradients(smoothed);
  const int w = img.width;
  const int h = img.height;

  // Non-maximum suppression along the quantized gradient direction.
  static constexpr int kBinDx[4] = {1, 1, 0, -1};
  static constexpr int kBinDy[4] = {0, 1, 1, 1};
  auto mag_at = [&](int x, int y) {
    return grad.magnitude[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w +
                          std::clamp(x, 0, w - 1)];
  };
  std::vector<std::uint8_t> state(static_cast<std::size_t>(w) * h, 0);  // 1 weak, 2 strong
  std::vector<std::size_t> strong;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double m = grad.magnitude[i];
      if (m <= 0.0 || m < static_cast<double>(low)) continue;
      const int b = grad.direction_bin[i];
      if (m < mag_at(x + kBinDx[b], y + kBinDy[b])) continue;
      if (m < mag_at(x - kBinDx[b], y - kBinDy[b])) continue;
      if (m >= static_cast<double>(high)) {
        state[i] = 2;
        strong.push_back(i);
      } else {
        state[i] = 1;
      }
    }
  }

  // Hysteresis: weak survivors must connect (8-neighbourhood) to a strong pixel.
  EdgeMap out = BinaryImage::filled(w, h, 0);
  std::vector<std::size_t> stack = strong;
  for (std::size_t i : strong) out.pixels[i] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (state[j] != 0 && !out.pixels[j]) {
          out.pixels[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return out;
}

std::vector<LineSegment> hough_probabilistic(const EdgeMap& edges,
                                             const HoughConfig& config,
                                             std::uint64_t seed) {
  if (edges.empty()) throw std::invalid_argument("zero-dimension edge map");
  if (!(config.rho_resolution > 0.0) || config.theta_step_deg <= 0 ||
      180 % config.theta_step_deg != 0 || config.vote_threshold < 1 ||
      !(config.sample_fraction > 0.0 && config.sample_fraction <= 1.0))
    throw std::invalid_argument("invalid line-transform configuration");

  std::vector<Point> points;
  for (int y = 0; y < edges.height; ++y)
    for (int x = 0; x < edges.width; ++x)
      if (edges.at(x, y)) points.push_back({x, y});
  if (points.empty()) return {};

  std::vector<Point> sample = points;
  std::mt19937_64 rng(seed);
  std::shuffle(sample.begin(), sample.end(), rng);
  const std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.sample_fraction *
                                               static_cast<double>(sample.size()))));
  sample.resize(std::min(keep, sample.size()));

  const int n_theta = 180 / config.theta_step_deg;
  const double diag = std::hypot(edges.width, edges.height);
  const int n_rho = 2 * static_cast<int>(std::ceil(diag / config.rho_resolution)) + 1;
  const int rho_offset = n_rho / 2;

  std::vector<double> sin_t(n_theta), cos_t(n_theta);
  for (int ti = 0; ti < n_theta; ++ti) {
    const double theta = (ti + 1) * config.theta_step_deg * kDegToRad;
    sin_t[ti] = std::sin(theta);
    cos_t[ti] = std::cos(theta);
  }

  std::vector<int> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
  auto rho_index = [&](double rho) {
    return static_cast<int>(std::lround(rho / config.rho_resolution)) + rho_offset;
  };
  for (const Point& p : sample) {
    for (int ti = 0; ti < n_theta; ++ti) {
      const double rho = p.x * cos_t[ti] + p.y * sin_t[ti];
      ++acc[static_cast<std::size_t>(ti) * n_rho + rho_index(rho)];
    }
  }

  // Locally maximal cells above the vote threshold, in deterministic order.
  auto acc_at = [&](int ti, int ri) -> int {
    if (ti < 0 || ri < 0 || ti >= n_theta || ri >= n_rho) return 0;
    return acc[static_cast<std::size_t>(ti) * n_rho + ri];
  };
  std::vector<LineSegment> segments;
  for (int ti = 0; ti < n_theta; ++ti) {
    for (int ri = 0; ri < n_rho; ++ri) {
      const int votes = acc_at(ti, ri);
      if (votes < config.vote_threshold) continue;
      bool is_peak = true;
      for (int dt = -1; dt <= 1 && is_peak; ++dt) {
        for (int dr = -1; dr <= 1; ++dr) {
          if (dt == 0 && dr == 0) continue;
          const int other = acc_at(ti + dt, ri + dr);
          if (other > votes ||
              (other == votes && (dt < 0 || (dt == 0 && dr < 0)))) {
            is_peak = false;
            break;
          }
        }
      }
      if (!is_peak) continue;

      // Gather the full edge set near this line and split it into runs.
      const double rho_cell = (ri - rho_offset) * config.rho_resolution;
      const double c = cos_t[ti];
      const double s = sin_t[ti];
      std::vector<std::pair<double, Point>> on_line;
      for (const Point& p : points) {
        const double d = p.x * c + p.y * s - rho_cell;
        if (std::abs(d) <= config.rho_resolution * 0.5 + 1e-9)
          on_line.push_back({-p.x * s + p.y * c, p});
      }
      std::sort(on_line.begin(), on_line.end(),
                [](const auto& l, const auto& r) { return l.first < r.first; });
      std::size_t run_start = 0;
      for (std::size_t i = 1; i <= on_line.size(); ++i) {
        const bool broke = i == on_line.size() ||
                           on_line[i].first - on_line[i - 1].first > config.max_gap;
        if (!broke) continue;
        const double len = on_line[i - 1].first - on_line[run_start].first;
        if (len >= config.min_length) {
          segments.push_back({on_line[run_start].second.x, on_line[run_start].second.y,
                              on_line[i - 1].second.x, on_line[i - 1].second.y, votes});
        }
        run_start = i;
      }
    }
  }
  return segments;
}

RotationEstimate estimate_rotation(const GrayImage& img, const HoughConfig& config,
                                   double sigma_fraction, std::uint64_t seed) {
  if (img.empty()) throw std::invalid_argument("zero-dimension image");
  const EdgeMap edges = canny_auto(img, sigma_fraction);
  const std::vector<LineSegment> segments = hough_probabilistic(edges, config, seed);
  if (segments.empty()) return {0.0, false};

  std::vector<double> angles;
  angles.reserve(segments.size());
  for (const LineSegment& seg : segments) {
    double a = std::atan2(static_cast<double>(seg.y1 - seg.y2),
                          static_cast<double>(seg.x1 - seg.x2)) / kDegToRad;
    if (a > 90.0) a -= 180.0;
    if (a <= -90.0) a += 180.0;
    // Fold the perpendicular grid direction onto the same skew measure.
    if (std::abs(a) > 45.0) a -= (a > 0 ? 90.0 : -90.0);
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  const std::size_t n = angles.size();
  const double median = n % 2 == 1 ? angles[n / 2]
                                   : (angles[n / 2 - 1] + angles[n / 2]) / 2.0;
  return {median, true};
}

GrayImage rotate(const GrayImage& img, double degrees) {
  if (img.empty()) throw std::invalid_argument("zero-dimension image");
  if (!(std::abs(degrees) < 90.0))
    throw std::invalid_argument("rotation angle must satisfy |angle| < 90 degrees");

  const double rad = degrees * kDegToRad;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;

  GrayImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Inverse mapping: rotate the destination point back into the source.
      const double dx = x - cx;
      const double dy = y - cy;
      const double sx = cx + cs * dx + sn * dy;
      const double sy = cy - sn * dx + cs * dy;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      double value = 255.0;  // white fill outside the source
      if (x0 >= -1 && y0 >= -1 && x0 <= img.width - 1 && y0 <= img.height - 1) {
        const double fx = sx - x0;
        const double fy = sy - y0;
        auto sample = [&](int xs, int ys) -> double {
          if (xs < 0 || ys < 0 || xs >= img.width || ys >= img.height) return 255.0;
          return img.at(xs, ys);
        };
        value = (1 - fx) * (1 - fy) * sample(x0, y0) + fx * (1 - fy) * sample(x0 + 1, y0) +
                (1 - fx) * fy * sample(x0, y0 + 1) + fx * fy * sample(x0 + 1, y0 + 1);
      }
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace ecgdig
