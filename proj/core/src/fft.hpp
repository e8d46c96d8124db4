#pragma once

#include <complex>
#include <span>
#include <vector>

// Thin RAII-safe wrappers over FFTW. Plan creation and destruction go through
// a process-wide mutex because the FFTW planner is not thread-safe; execution
// is safe to run concurrently.

namespace pfocal::fft {

/// Forward real-to-complex DFT. Returns n/2 + 1 bins for an n-sample input.
std::vector<std::complex<double>> r2c(std::span<const double> input);

/// Inverse complex-to-complex DFT, unscaled (FFTW convention); callers divide
/// by n where a true inverse is needed.
std::vector<std::complex<double>> c2c_backward(std::span<const std::complex<double>> input);

}  // namespace pfocal::fft
