#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ecgdig/resample.hpp"

using namespace ecgdig;

namespace {

constexpr double kPi = std::numbers::pi;

// Literal transform definition, no angle reduction, kept deliberately separate
// from the library implementation.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k) *
                                        static_cast<double>(i) / static_cast<double>(n));
    out[k] = acc;
  }
  return out;
}

// Periodic-sinc (Dirichlet kernel) interpolation of a length-n sequence at
// continuous time t, the time-domain mirror of spectral zero padding.  The
// even-length kernel carries the half-and-half folding-frequency split.
double dirichlet_interp(const std::vector<double>& x, double t) {
  const int n = static_cast<int>(x.size());
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u = t - k;
    double w;
    if (std::abs(u - std::round(u)) < 1e-12) {
      const long long r = std::llround(u);
      w = (((r % n) + n) % n == 0) ? 1.0 : 0.0;
    } else if (n % 2 == 1) {
      w = std::sin(kPi * u) / (n * std::sin(kPi * u / n));
    } else {
      w = std::sin(kPi * u) * std::cos(kPi * u / n) / (n * std::sin(kPi * u / n));
    }
    acc += x[k] * w;
  }
  return acc;
}

std::vector<double> random_sequence(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

// Natural cubic spline through (0,y0),(1,y1),... evaluated at t, used only to
// contrast overshoot behaviour against the bandlimited upsampler.
double natural_spline_eval(const std::vector<double>& y, double t) {
  const std::size_t n = y.size();
  std::vector<double> m(n, 0.0);  // second derivatives, natural ends
  if (n > 2) {
    std::vector<double> diag(n, 2.0), rhs(n, 0.0), upper(n, 0.5);
    for (std::size_t i = 1; i + 1 < n; ++i)
      rhs[i] = 3.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
    // Thomas sweep over the interior rows (h = 1, so all weights are 1/2).
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double denom = diag[i] - 0.5 * c[i - 1];
      c[i] = upper[i] / denom;
      d[i] = (rhs[i] - 0.5 * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];
  }
  const std::size_t i =
      static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, static_cast<double>(n - 2)));
  const double u = t - static_cast<double>(i);
  const double a = y[i];
  const double b = y[i + 1] - y[i] - (2.0 * m[i] + m[i + 1]) / 6.0;
  return a + b * u + 0.5 * m[i] * u * u + (m[i + 1] - m[i]) / 6.0 * u * u * u;
}

}  // namespace

TEST_CASE("transform of a constant is a pure DC bin") {
  Spectrum s = dft({1.0, 1.0, 1.0, 1.0});
  REQUIRE(s.size() == 4);
  CHECK(std::abs(s.bins[0] - std::complex<double>(4.0, 0.0)) < 1e-12);
  for (int k = 1; k < 4; ++k) CHECK(std::abs(s.bins[k]) < 1e-12);
}

TEST_CASE("transform of an impulse is flat") {
  Spectrum s = dft({1.0, 0.0, 0.0, 0.0});
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(s.bins[k] - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("transform of a cosine concentrates in the two mirrored bins") {
  std::vector<double> x(8);
  for (int i = 0; i < 8; ++i) x[i] = std::cos(2.0 * kPi * i / 8.0);
  Spectrum s = dft(x);
  auto reference = naive_dft(x);
  for (int k = 0; k < 8; ++k) CHECK(std::abs(s.bins[k] - reference[k]) < 1e-9);
  CHECK(std::abs(s.bins[1] - std::complex<double>(4.0, 0.0)) < 1e-9);
  CHECK(std::abs(s.bins[7] - std::complex<double>(4.0, 0.0)) < 1e-9);
  for (int k : {0, 2, 3, 4, 5, 6}) CHECK(std::abs(s.bins[k]) < 1e-9);
}

TEST_CASE("transform agrees with the literal definition on random input") {
  for (std::size_t n : {5, 12, 33, 64}) {
    auto x = random_sequence(n, 100 + n);
    Spectrum s = dft(x);
    auto reference = naive_dft(x);
    double max_mag = 0.0;
    for (const auto& b : reference) max_mag = std::max(max_mag, std::abs(b));
    for (std::size_t k = 0; k < n; ++k)
      CHECK(std::abs(s.bins[k] - reference[k]) <= 1e-10 * std::max(1.0, max_mag));
  }
}

TEST_CASE("inverse transform undoes the forward transform") {
  auto x = random_sequence(64, 7);
  auto back = idft(dft(x));
  REQUIRE(back.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-10));
}

TEST_CASE("inverse of a DC-only spectrum is all ones") {
  Spectrum s;
  s.source_length = 6;
  s.bins.assign(6, 0.0);
  s.bins[0] = 6.0;
  auto x = idft(s);
  for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse transform recovers cosine samples") {
  std::vector<double> x(8);
  for (int i = 0; i < 8; ++i) x[i] = std::cos(2.0 * kPi * i / 8.0);
  auto back = idft(dft(x));
  for (int i = 0; i < 8; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-9));
}

TEST_CASE("inverse transform rejects spectra that are not conjugate-symmetric") {
  Spectrum s;
  s.source_length = 4;
  s.bins = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  CHECK_THROWS_WITH_AS(idft(s), "non-real spectrum", std::invalid_argument);

  Spectrum dc_imag;
  dc_imag.source_length = 3;
  dc_imag.bins = {{0.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}};
  CHECK_THROWS_AS(idft(dc_imag), std::invalid_argument);
}

TEST_CASE("inverse transform validates the declared length") {
  Spectrum s;
  s.source_length = 5;
  s.bins.assign(4, 0.0);
  CHECK_THROWS_AS(idft(s), std::invalid_argument);
  CHECK_THROWS_AS(idft(Spectrum{}), std::invalid_argument);
}

TEST_CASE("upsampling by one returns the input") {
  for (std::size_t n : {6, 9}) {  // even and odd paths
    auto x = random_sequence(n, n);
    auto y = upsample_zeropad(x, 1);
    REQUIRE(y.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-10));
  }
}

TEST_CASE("upsampling a pure sine reproduces the continuous sinusoid") {
  std::vector<double> x(16);
  for (int i = 0; i < 16; ++i) x[i] = std::sin(2.0 * kPi * i / 16.0);
  auto y = upsample_zeropad(x, 8);
  REQUIRE(y.size() == 128);
  for (int j = 0; j < 128; ++j) {
    const double t = j / 8.0;
    CHECK(std::abs(y[j] - std::sin(2.0 * kPi * t / 16.0)) < 1e-9);
  }
}

TEST_CASE("upsampling matches periodic-sinc interpolation everywhere") {
  for (std::size_t n : {8, 16, 32, 9, 15}) {
    auto x = random_sequence(n, 40 + n);
    auto y = upsample_zeropad(x, 8);
    REQUIRE(y.size() == n * 8);
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double t = static_cast<double>(j) / 8.0;
      CHECK(std::abs(y[j] - dirichlet_interp(x, t)) < 1e-9);
    }
  }
}

TEST_CASE("upsampling preserves the original samples") {
  auto x = random_sequence(30, 3);
  for (int factor : {2, 3, 8}) {
    auto y = upsample_zeropad(x, factor);
    for (std::size_t k = 0; k < x.size(); ++k)
      CHECK(std::abs(y[k * factor] - x[k]) < 1e-9);
  }
}

TEST_CASE("upsampling rejects degenerate requests") {
  CHECK_THROWS_AS(upsample_zeropad({1.0, 2.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(upsample_zeropad({1.0}, 2), std::invalid_argument);
}

TEST_CASE("energy is conserved between domains") {
  for (std::size_t n : {7, 24, 50}) {
    auto x = random_sequence(n, 900 + n);
    Spectrum s = dft(x);
    double time_energy = 0.0;
    for (double v : x) time_energy += v * v;
    double freq_energy = 0.0;
    for (const auto& b : s.bins) freq_energy += std::norm(b);
    freq_energy /= static_cast<double>(n);
    CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-9));
  }
}

TEST_CASE("upsampling is linear") {
  auto x = random_sequence(20, 1);
  auto y = random_sequence(20, 2);
  const double alpha = 1.7, beta = -0.4;
  std::vector<double> mix(20);
  for (int i = 0; i < 20; ++i) mix[i] = alpha * x[i] + beta * y[i];
  auto up_mix = upsample_zeropad(mix, 4);
  auto up_x = upsample_zeropad(x, 4);
  auto up_y = upsample_zeropad(y, 4);
  for (std::size_t i = 0; i < up_mix.size(); ++i)
    CHECK(std::abs(up_mix[i] - (alpha * up_x[i] + beta * up_y[i])) < 1e-9);
}

TEST_CASE("overshoot contrast against a cubic spline on a bridged gap") {
  // A flat trace with a plateau whose edges are linear bridges, the shape a
  // bridged dropout leaves behind.  Both interpolants are measured for
  // excursion beyond the input range; the bandlimited one rings harder at the
  // kinks.  Reported for inspection, no threshold enforced.
  std::vector<double> x(64, 0.0);
  for (int i = 24; i < 40; ++i) x[i] = 1.0;
  for (int i = 20; i < 24; ++i) x[i] = (i - 20 + 1) / 5.0;  // bridged rise
  for (int i = 40; i < 44; ++i) x[i] = (44 - i - 1) / 5.0;  // bridged fall
  double lo = x[0], hi = x[0];
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  auto y = upsample_zeropad(x, 8);
  double band_overshoot = 0.0;
  for (double v : y)
    band_overshoot = std::max({band_overshoot, v - hi, lo - v});

  double spline_overshoot = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double t = std::min(static_cast<double>(j) / 8.0, 63.0);
    const double v = natural_spline_eval(x, t);
    spline_overshoot = std::max({spline_overshoot, v - hi, lo - v});
  }

  MESSAGE("bandlimited overshoot beyond input range: " << band_overshoot);
  MESSAGE("cubic spline overshoot beyond input range: " << spline_overshoot);
  CHECK(std::isfinite(band_overshoot));
  CHECK(std::isfinite(spline_overshoot));
}
