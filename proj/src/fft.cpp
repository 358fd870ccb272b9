#include "tubelab/fft.hpp"

#include <cmath>
#include <stdexcept>

#include "tubelab/parallel.hpp"

namespace tubelab {

void fft_pow2(std::complex<double>* data, size_t n, bool inverse) {
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_pow2: size must be a power of two");
    // bit reversal
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / (double)len;
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = data[i + k];
                std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void fft_2d(std::vector<std::complex<double>>& grid, size_t n, bool inverse, int threads) {
    if (grid.size() != n * n) throw std::invalid_argument("fft_2d: grid size mismatch");
    parallel_for((int64_t)n, threads,
                 [&](int64_t row) { fft_pow2(grid.data() + (size_t)row * n, n, inverse); });
    // columns: transpose, transform rows, transpose back
    std::vector<std::complex<double>> tmp(grid.size());
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) tmp[j * n + i] = grid[i * n + j];
    parallel_for((int64_t)n, threads,
                 [&](int64_t row) { fft_pow2(tmp.data() + (size_t)row * n, n, inverse); });
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) grid[i * n + j] = tmp[j * n + i];
    if (inverse) {
        const double norm = 1.0 / ((double)n * (double)n);
        for (auto& z : grid) z *= norm;
    }
}

}  // namespace tubelab
