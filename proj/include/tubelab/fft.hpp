#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace tubelab {

// In-place iterative radix-2 transform; n must be a power of two.
void fft_pow2(std::complex<double>* data, size_t n, bool inverse);

// 2-D transform of an n x n row-major grid. Row and column passes are
// independent per line, so threading never changes a bit of the result.
// The inverse includes the 1/n^2 normalization.
void fft_2d(std::vector<std::complex<double>>& grid, size_t n, bool inverse,
            int threads = 1);

}  // namespace tubelab
