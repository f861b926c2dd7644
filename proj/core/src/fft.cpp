#include "specflow/fft.hpp"

#include <cmath>

#include "specflow/errors.hpp"

namespace specflow {

void fft_forward(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw InvalidArgument("fft_forward: size must be a power of two");
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Refresh the twiddle periodically to stop accumulation drift.
        if ((k & 63u) == 0) {
          w = std::complex<double>(std::cos(ang * static_cast<double>(k)),
                                   std::sin(ang * static_cast<double>(k)));
        }
        std::complex<double> u = data[i + k];
        std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<std::complex<double>> fourier_coefficients(const std::vector<double>& samples) {
  std::vector<std::complex<double>> buf(samples.begin(), samples.end());
  fft_forward(buf);
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (auto& c : buf) c *= inv;
  return buf;
}

}  // namespace specflow
