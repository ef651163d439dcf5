#pragma once

#include <complex>
#include <vector>

#include "wrd/image.hpp"

namespace wrd {

/// DC-centered log-magnitude Fourier spectrum, point-symmetric about the
/// center for real inputs.
struct Spectrum {
    int height = 0;
    int width = 0;
    std::vector<double> values;  // log(1 + |FFT|), row-major

    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Orthonormal 2D type-II DCT of a plane. idct2(dct2(x)) == x to ~1e-12 and
/// energy is preserved (Parseval).
Plane dct2(const Plane& plane);
Plane idct2(const Plane& coeffs);

/// Convenience overload; input must be single-channel.
Plane dct2(const Image& img);

/// In-place complex FFT over a 2D grid (rows then columns). Arbitrary sizes
/// (radix-2 plus Bluestein). No normalization; callers scale as needed.
void fft2(std::vector<std::complex<double>>& grid, int height, int width, bool inverse);

/// log(1 + |FFT|) of the luminance with DC shifted to the center.
Spectrum fourier_log_spectrum(const Image& img);

/// Same, for an unconstrained plane (used for residual diagnostics).
Spectrum fourier_log_spectrum(const Plane& plane);

/// Fraction of plane energy at radial frequency above half Nyquist
/// (per-axis normalized; DC excluded). Zero-energy planes return 0.
double high_frequency_energy_fraction(const Plane& plane);

}  // namespace wrd
