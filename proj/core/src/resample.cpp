#include "ecgdig/resample.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ecgdig {

namespace {

// Unit roots exp(sign * i 2 pi r / n) for r = 0..n-1.  Indexing the table by
// (k*n) mod n keeps angles reduced, so precision does not degrade with length.
std::vector<std::complex<double>> unit_roots(std::size_t n, double sign) {
  std::vector<std::complex<double>> roots(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(r) /
                         static_cast<double>(n);
    roots[r] = std::polar(1.0, angle);
  }
  return roots;
}

}  // namespace

Spectrum dft(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("empty sequence");
  const std::size_t n = x.size();
  const auto roots = unit_roots(n, -1.0);
  Spectrum spectrum;
  spectrum.source_length = n;
  spectrum.bins.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * roots[(k * i) % n];
    spectrum.bins[k] = acc;
  }
  return spectrum;
}

std::vector<double> idft(const Spectrum& spectrum) {
  const std::size_t n = spectrum.bins.size();
  if (n == 0) throw std::invalid_argument("empty spectrum");
  if (spectrum.source_length != n)
    throw std::invalid_argument("spectrum length does not match declared source length");

  double max_mag = 0.0;
  for (const auto& b : spectrum.bins) max_mag = std::max(max_mag, std::abs(b));
  const double tol = 1e-9 * std::max(1.0, max_mag);
  for (std::size_t k = 0; k < n; ++k) {
    const auto mirror = std::conj(spectrum.bins[(n - k) % n]);
    if (std::abs(spectrum.bins[k] - mirror) > tol)
      throw std::invalid_argument("non-real spectrum");
  }

  // Bins that are exactly zero contribute nothing; skipping them turns the
  // inverse of a zero-padded spectrum into an O(N*active) sum.
  std::vector<std::size_t> active;
  active.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    if (spectrum.bins[k] != 0.0) active.push_back(k);

  const auto roots = unit_roots(n, 1.0);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> acc = 0.0;
    for (std::size_t k : active) acc += spectrum.bins[k] * roots[(k * i) % n];
    x[i] = acc.real() / static_cast<double>(n);
  }
  return x;
}

std::vector<double> upsample_zeropad(const std::vector<double>& x, int factor) {
  if (factor < 1) throw std::invalid_argument("upsampling factor must be at least 1");
  if (x.size() < 2) throw std::invalid_argument("need at least two samples to upsample");

  const Spectrum spectrum = dft(x);
  const std::size_t n = x.size();
  const std::size_t m = n * static_cast<std::size_t>(factor);
  const double scale = static_cast<double>(factor);

  Spectrum padded;
  padded.source_length = m;
  padded.bins.assign(m, 0.0);
  if (n % 2 == 1) {
    const std::size_t half = (n - 1) / 2;  // bins 0..half stay low, the rest wrap high
    for (std::size_t k = 0; k <= half; ++k) padded.bins[k] = scale * spectrum.bins[k];
    for (std::size_t k = half + 1; k < n; ++k)
      padded.bins[m - n + k] = scale * spectrum.bins[k];
  } else {
    const std::size_t nyquist = n / 2;
    for (std::size_t k = 0; k < nyquist; ++k) padded.bins[k] = scale * spectrum.bins[k];
    for (std::size_t k = nyquist + 1; k < n; ++k)
      padded.bins[m - n + k] = scale * spectrum.bins[k];
    // Half of the folding-frequency bin goes to each side, which keeps the
    // padded spectrum conjugate-symmetric.  At factor 1 both halves land on
    // the same bin and reassemble it.
    padded.bins[nyquist] += scale * spectrum.bins[nyquist] * 0.5;
    padded.bins[m - nyquist] += scale * spectrum.bins[nyquist] * 0.5;
  }
  return idft(padded);
}

}  // namespace ecgdig
