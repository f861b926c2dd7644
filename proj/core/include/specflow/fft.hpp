#pragma once

#include <complex>
#include <vector>

namespace specflow {

// In-place iterative radix-2 Cooley-Tukey, forward sign convention
// X_k = sum_j x_j e^{-2 pi i jk / N}. N must be a power of two.
void fft_forward(std::vector<std::complex<double>>& data);

// Fourier coefficients of a real function sampled at N uniform points on a
// unit period: c_k = (1/N) sum_j f(j/N) e^{-2 pi i jk/N}, returned for
// k = 0..N-1 (k > N/2 aliases negative frequencies).
std::vector<std::complex<double>> fourier_coefficients(const std::vector<double>& samples);

}  // namespace specflow
