#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace ecgdig {

// Frequency-domain image of a real time series.
struct Spectrum {
  std::vector<std::complex<double>> bins;
  std::size_t source_length = 0;  // length of the originating sequence

  std::size_t size() const { return bins.size(); }
};

// Forward transform, X[k] = sum_n x[n] * exp(-i 2 pi k n / N).  Direct
// evaluation with exact angle reduction; throws on an empty input.
Spectrum dft(const std::vector<double>& x);

// Inverse transform for spectra of real origin.  The spectrum must be
// conjugate-symmetric (scale-aware tolerance); otherwise the reconstruction
// would not be real and the call throws "non-real spectrum".  The negligible
// imaginary residue is discarded.
std::vector<double> idft(const Spectrum& spectrum);

// Bandlimited periodic interpolation by spectral zero padding: transform,
// insert N*(factor-1) zeros at the folding frequency (splitting the Nyquist
// bin in half for even N), rescale by the factor, and transform back.  The
// result has length factor*N and passes through every input sample.
std::vector<double> upsample_zeropad(const std::vector<double>& x, int factor);

}  // namespace ecgdig
