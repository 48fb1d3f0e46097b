#pragma once

// Thin FFTW wrapper. Plans are created once per (kind, size) under a mutex
// and executed through the new-array interface, which is safe to call from
// several threads at once.

#include <complex>
#include <span>

namespace enstrophy::detail {

using Complex = std::complex<double>;

/// In-place 2D transform of a G x G row-major array.
/// sign = +1 computes sum_k c_k exp(+2 pi i k.j / G) (synthesis),
/// sign = -1 computes sum_j g_j exp(-2 pi i k.j / G) (analysis, unnormalized).
void dft_2d(std::span<Complex> data, int grid_size, int sign);

/// Half-spectrum (G x (G/2+1)) to real grid (G x G), unnormalized synthesis.
/// The input buffer is overwritten.
void synthesize_real_2d(std::span<Complex> half_spectrum, std::span<double> grid, int grid_size);

/// Real grid to half spectrum, unnormalized analysis. The input is preserved.
void analyze_real_2d(std::span<double> grid, std::span<Complex> half_spectrum, int grid_size);

}  // namespace enstrophy::detail
