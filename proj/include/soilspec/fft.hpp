#pragma once

#include <complex>
#include <vector>

namespace soilspec {

// Forward DFT of a real signal, any length N >= 1 (radix-2 for powers of two,
// Bluestein's chirp-z otherwise). Unnormalized: X_k = sum_n x_n e^{-2πi kn/N}.
std::vector<std::complex<double>> dft(const std::vector<double>& x);

// |X_k| for k = 0..N-1. Conjugate-symmetric redundancy is kept on purpose so
// the block width equals the input width. Throws on non-finite input.
std::vector<double> fft_magnitude(const std::vector<double>& x);

}  // namespace soilspec
