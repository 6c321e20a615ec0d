#ifndef GFD_SPECTRAL_HPP
#define GFD_SPECTRAL_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gfd {

// Magnitude spectrum over the non-negative frequencies, floor(n/2)+1 bins,
// freqs_hz[k] = k*fs/n. Raw |DFT|, no normalization.
struct Spectrum {
  std::vector<double> freqs_hz;
  std::vector<double> magnitudes;
};

// One-sided Welch power spectral density (density scaling: sum(power)*df equals
// the windowed mean square of the input).
struct Psd {
  std::vector<double> freqs_hz;
  std::vector<double> power;
  std::size_t subsegment_len = 0;
  std::string window_name = "hann";
};

// n >= 2, finite input. Length of input is the transform length (no padding).
Spectrum fft_magnitude(std::span<const double> samples, double sample_rate_hz);

// Hann window, 50% overlap. 8 <= subsegment_len <= samples.size().
Psd welch_psd(std::span<const double> samples, double sample_rate_hz,
              std::size_t subsegment_len);

// Modulus of the analytic signal (frequency-domain construction). n >= 4.
std::vector<double> hilbert_envelope(std::span<const double> samples);

// Mean Teager-Kaiser operator energy: sum(x[j]^2 - x[j-1]*x[j+1]) / (n-2). n >= 3.
double teager_kaiser_energy(std::span<const double> samples);

namespace detail {
// In-place complex FFT, any length (radix-2 for powers of two, Bluestein
// otherwise). inverse=true includes the 1/n scale.
void fft(std::vector<std::complex<double>>& a, bool inverse);
}  // namespace detail

}  // namespace gfd

#endif
