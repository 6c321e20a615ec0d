#include "gfd/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "gfd/errors.hpp"

namespace gfd {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_finite(std::span<const double> x, const char* op) {
  for (double v : x) {
    if (!std::isfinite(v)) throw NonFinite(std::string(op) + ": non-finite sample");
  }
}

// Iterative radix-2 Cooley-Tukey. Twiddles come from a per-call table indexed by
// exact angle so rounding does not accumulate across stages.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    double ang = sign * 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    tw[k] = {std::cos(ang), std::sin(ang)};
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * tw[k * stride];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// Bluestein chirp-z: expresses an arbitrary-length DFT as a convolution that is
// evaluated with a power-of-two FFT. Phase uses j^2 mod 2n to stay exact for
// large j.
void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;

  std::vector<std::complex<double>> chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t j2 = (static_cast<std::uint64_t>(j) * j) % (2 * n);
    double ang = sign * kPi * static_cast<double>(j2) / static_cast<double>(n);
    chirp[j] = {std::cos(ang), std::sin(ang)};
  }

  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  std::vector<std::complex<double>> x(m), y(m);
  for (std::size_t j = 0; j < n; ++j) x[j] = a[j] * chirp[j];
  y[0] = std::conj(chirp[0]);
  for (std::size_t j = 1; j < n; ++j) {
    y[j] = std::conj(chirp[j]);
    y[m - j] = std::conj(chirp[j]);
  }

  fft_pow2(x, false);
  fft_pow2(y, false);
  for (std::size_t j = 0; j < m; ++j) x[j] *= y[j];
  fft_pow2(x, true);
  for (std::size_t j = 0; j < m; ++j) x[j] /= static_cast<double>(m);

  for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * chirp[j];
}

}  // namespace

namespace detail {

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) return;
  if (is_pow2(n)) {
    fft_pow2(a, inverse);
  } else {
    fft_bluestein(a, inverse);
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

}  // namespace detail

Spectrum fft_magnitude(std::span<const double> samples, double sample_rate_hz) {
  const std::size_t n = samples.size();
  if (n < 2) throw TooShort("fft_magnitude: need at least 2 samples");
  check_finite(samples, "fft_magnitude");

  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = samples[i];
  detail::fft(a, false);

  const std::size_t half = n / 2 + 1;
  Spectrum s;
  s.freqs_hz.resize(half);
  s.magnitudes.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    s.freqs_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
    s.magnitudes[k] = std::abs(a[k]);
  }
  return s;
}

Psd welch_psd(std::span<const double> samples, double sample_rate_hz,
              std::size_t subsegment_len) {
  const std::size_t n = samples.size();
  const std::size_t L = subsegment_len;
  if (L < 8 || L > n)
    throw SegmentTooShort("welch_psd: need 8 <= subsegment_len <= length");
  check_finite(samples, "welch_psd");

  std::vector<double> window(L);
  double wsq = 0.0;
  for (std::size_t j = 0; j < L; ++j) {
    window[j] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(j) /
                                      static_cast<double>(L)));
    wsq += window[j] * window[j];
  }
  const double scale = 1.0 / (sample_rate_hz * wsq);

  const std::size_t half = L / 2 + 1;
  const std::size_t step = L - L / 2;  // 50% overlap
  const std::size_t count = 1 + (n - L) / step;

  std::vector<double> acc(half, 0.0);
  std::vector<std::complex<double>> buf(L);
  for (std::size_t s = 0; s < count; ++s) {
    const double* seg = samples.data() + s * step;
    for (std::size_t j = 0; j < L; ++j) buf[j] = seg[j] * window[j];
    detail::fft(buf, false);
    for (std::size_t k = 0; k < half; ++k) {
      double p = std::norm(buf[k]) * scale;
      // one-sided: interior bins carry both halves of the spectrum
      if (k != 0 && !(L % 2 == 0 && k == half - 1)) p *= 2.0;
      acc[k] += p;
    }
  }

  Psd psd;
  psd.subsegment_len = L;
  psd.freqs_hz.resize(half);
  psd.power.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    psd.freqs_hz[k] = static_cast<double>(k) * sample_rate_hz / static_cast<double>(L);
    psd.power[k] = acc[k] / static_cast<double>(count);
  }
  return psd;
}

std::vector<double> hilbert_envelope(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 4) throw TooShort("hilbert_envelope: need at least 4 samples");
  check_finite(samples, "hilbert_envelope");

  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = samples[i];
  detail::fft(a, false);

  // analytic signal: keep DC (and Nyquist when even), double positives, zero negatives
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < half + (n % 2 ? 1 : 0); ++k) a[k] *= 2.0;
  for (std::size_t k = half + 1; k < n; ++k) a[k] = 0.0;

  detail::fft(a, true);

  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(a[i]);
  return env;
}

double teager_kaiser_energy(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 3) throw TooShort("teager_kaiser_energy: need at least 3 samples");
  check_finite(samples, "teager_kaiser_energy");

  double sum = 0.0;
  for (std::size_t j = 0; j + 2 < n; ++j) {
    sum += samples[j + 1] * samples[j + 1] - samples[j] * samples[j + 2];
  }
  return sum / static_cast<double>(n - 2);
}

}  // namespace gfd
