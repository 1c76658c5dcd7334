#include "soilspec/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace soilspec {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 Cooley-Tukey; n must be a power of two.
void fft_pow2(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const cd wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cd u = a[i + j];
        const cd v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

// Bluestein's algorithm: DFT of arbitrary length as a circular convolution at
// the next power of two >= 2N-1. Chirp exponents are reduced mod 2N to keep
// the trig arguments small.
std::vector<cd> dft_bluestein(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  const std::size_t m = next_pow2(2 * n - 1);

  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const long long kk = (static_cast<long long>(k) * static_cast<long long>(k)) %
                         (2 * static_cast<long long>(n));
    const double ang = M_PI * static_cast<double>(kk) / static_cast<double>(n);
    chirp[k] = cd(std::cos(ang), -std::sin(ang));
  }

  std::vector<cd> a(m, cd(0.0, 0.0)), b(m, cd(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_pow2(a, true);

  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  return out;
}

}  // namespace

std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("dft: empty input");
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("dft: non-finite input");
  }
  std::vector<cd> a(x.begin(), x.end());
  if (a.size() == 1) return a;
  if (is_pow2(a.size())) {
    fft_pow2(a, false);
    return a;
  }
  return dft_bluestein(a);
}

std::vector<double> fft_magnitude(const std::vector<double>& x) {
  const auto spectrum = dft(x);
  std::vector<double> mag(spectrum.size());
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(spectrum[k]);
  return mag;
}

}  // namespace soilspec
