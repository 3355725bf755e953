#pragma once

#include <complex>
#include <vector>

#include "rieszlab/grid.hpp"

namespace rieszlab {

// Unnormalized forward DFT of a real field on the grid (row-major layout,
// axis 0 slowest, matching GridFunction indexing).
std::vector<std::complex<double>> fft_forward(const Grid& g,
                                              const std::vector<double>& in);

// Inverse DFT with 1/N normalization; returns the real part (inputs are
// conjugate-symmetric by construction everywhere this is used).
std::vector<double> fft_inverse(const Grid& g,
                                const std::vector<std::complex<double>>& in);

}  // namespace rieszlab
