#include "wrd/transforms.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace wrd {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Cached orthonormal DCT-II basis matrix for a given size:
// C[k][n] = c(k) cos(pi (2n+1) k / (2N)), c(0)=sqrt(1/N), c(k)=sqrt(2/N).
const std::vector<double>& dct_matrix(int n) {
    static std::mutex mutex;
    static std::map<int, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        const double c = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
        for (int j = 0; j < n; ++j)
            m[static_cast<std::size_t>(k) * n + j] = c * std::cos(kPi * (2 * j + 1) * k / (2.0 * n));
    }
    return cache.emplace(n, std::move(m)).first->second;
}

// out = A * B where A is (n x n) basis (optionally transposed) applied to the
// rows/columns of a plane. Plain loops; cache-friendly enough for desk scale.
void apply_rows(const std::vector<double>& basis, bool transposed, const Plane& in, Plane& out) {
    const int h = in.height, w = in.width;
    for (int y = 0; y < h; ++y) {
        const double* src = &in.values[static_cast<std::size_t>(y) * w];
        double* dst = &out.values[static_cast<std::size_t>(y) * w];
        for (int k = 0; k < w; ++k) dst[k] = 0.0;
        for (int j = 0; j < w; ++j) {
            const double v = src[j];
            if (v == 0.0) continue;
            if (transposed) {
                const double* col = &basis[static_cast<std::size_t>(j) * w];
                for (int k = 0; k < w; ++k) dst[k] += col[k] * v;
            } else {
                for (int k = 0; k < w; ++k) dst[k] += basis[static_cast<std::size_t>(k) * w + j] * v;
            }
        }
    }
}

void apply_cols(const std::vector<double>& basis, bool transposed, const Plane& in, Plane& out) {
    const int h = in.height, w = in.width;
    for (double& v : out.values) v = 0.0;
    for (int j = 0; j < h; ++j) {
        const double* src = &in.values[static_cast<std::size_t>(j) * w];
        for (int k = 0; k < h; ++k) {
            const double a = transposed ? basis[static_cast<std::size_t>(j) * h + k]
                                        : basis[static_cast<std::size_t>(k) * h + j];
            if (a == 0.0) continue;
            double* dst = &out.values[static_cast<std::size_t>(k) * w];
            for (int x = 0; x < w; ++x) dst[x] += a * src[x];
        }
    }
}

using Cplx = std::complex<double>;

void fft_pow2(std::vector<Cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const Cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const Cplx u = a[i + j];
                const Cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Bluestein chirp-z for arbitrary lengths.
void fft_any(std::vector<Cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (is_pow2(n)) {
        fft_pow2(a, inverse);
        return;
    }
    std::size_t m = 1;
    while (m < 2 * n + 1) m <<= 1;
    std::vector<Cplx> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the angle argument small
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = kPi * static_cast<double>(k2) / static_cast<double>(n) *
                           (inverse ? 1.0 : -1.0);
        chirp[k] = Cplx(std::cos(ang), std::sin(ang));
    }
    std::vector<Cplx> p(m, Cplx(0, 0)), q(m, Cplx(0, 0));
    for (std::size_t k = 0; k < n; ++k) p[k] = a[k] * std::conj(chirp[k]);
    q[0] = chirp[0];
    for (std::size_t k = 1; k < n; ++k) q[k] = q[m - k] = chirp[k];
    fft_pow2(p, false);
    fft_pow2(q, false);
    for (std::size_t k = 0; k < m; ++k) p[k] *= q[k];
    fft_pow2(p, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = p[k] * scale * std::conj(chirp[k]);
}

}  // namespace

Plane dct2(const Plane& plane) {
    const auto& row_basis = dct_matrix(plane.width);
    const auto& col_basis = dct_matrix(plane.height);
    Plane tmp(plane.height, plane.width), out(plane.height, plane.width);
    apply_rows(row_basis, false, plane, tmp);   // along x: X * C^T
    apply_cols(col_basis, false, tmp, out);     // along y: C * X
    return out;
}

Plane idct2(const Plane& coeffs) {
    const auto& row_basis = dct_matrix(coeffs.width);
    const auto& col_basis = dct_matrix(coeffs.height);
    Plane tmp(coeffs.height, coeffs.width), out(coeffs.height, coeffs.width);
    apply_rows(row_basis, true, coeffs, tmp);
    apply_cols(col_basis, true, tmp, out);
    return out;
}

Plane dct2(const Image& img) {
    if (img.channels != 1)
        throw std::invalid_argument("dct2 requires a single-channel image");
    Plane p(img.height, img.width);
    p.values = img.data;
    return dct2(p);
}

void fft2(std::vector<Cplx>& grid, int height, int width, bool inverse) {
    if (grid.size() != static_cast<std::size_t>(height) * width)
        throw std::invalid_argument("fft2 grid size mismatch");
    std::vector<Cplx> line(std::max(height, width));
    for (int y = 0; y < height; ++y) {
        line.assign(grid.begin() + static_cast<std::ptrdiff_t>(y) * width,
                    grid.begin() + static_cast<std::ptrdiff_t>(y + 1) * width);
        fft_any(line, inverse);
        std::copy(line.begin(), line.end(), grid.begin() + static_cast<std::ptrdiff_t>(y) * width);
    }
    line.resize(height);
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) line[y] = grid[static_cast<std::size_t>(y) * width + x];
        fft_any(line, inverse);
        for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = line[y];
    }
}

Spectrum fourier_log_spectrum(const Plane& plane) {
    const int h = plane.height, w = plane.width;
    std::vector<Cplx> grid(plane.values.size());
    for (std::size_t i = 0; i < plane.values.size(); ++i) grid[i] = Cplx(plane.values[i], 0.0);
    fft2(grid, h, w, false);

    Spectrum spec;
    spec.height = h;
    spec.width = w;
    spec.values.resize(grid.size());
    const int cy = h / 2, cx = w / 2;
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v) {
            const int sy = (u + cy) % h;
            const int sx = (v + cx) % w;
            spec.values[static_cast<std::size_t>(sy) * w + sx] =
                std::log1p(std::abs(grid[static_cast<std::size_t>(u) * w + v]));
        }
    return spec;
}

Spectrum fourier_log_spectrum(const Image& img) {
    validate_image(img);
    return fourier_log_spectrum(luminance(img));
}

double high_frequency_energy_fraction(const Plane& plane) {
    const int h = plane.height, w = plane.width;
    std::vector<Cplx> grid(plane.values.size());
    for (std::size_t i = 0; i < plane.values.size(); ++i) grid[i] = Cplx(plane.values[i], 0.0);
    fft2(grid, h, w, false);

    double total = 0.0, high = 0.0;
    for (int u = 0; u < h; ++u) {
        const int fu = (u <= h / 2) ? u : u - h;
        const double ny = std::abs(fu) / (h / 2.0);
        for (int v = 0; v < w; ++v) {
            if (u == 0 && v == 0) continue;  // DC carries the mean, not texture
            const int fv = (v <= w / 2) ? v : v - w;
            const double nx = std::abs(fv) / (w / 2.0);
            const double e = std::norm(grid[static_cast<std::size_t>(u) * w + v]);
            total += e;
            if (std::hypot(ny, nx) > 0.5) high += e;
        }
    }
    if (total <= 0.0) return 0.0;
    return high / total;
}

}  // namespace wrd
