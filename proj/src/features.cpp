#include "wrd/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "wrd/transforms.hpp"

namespace wrd {

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = [] {
        std::array<std::string, kFeatureCount> n;
        for (int i = 0; i < 16; ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "radial_logspec_%02d", i);
            n[i] = buf;
        }
        n[16] = "hf_energy_fraction";
        n[17] = "noise_sigma";
        n[18] = "blockiness";
        n[19] = "median_resid_var";
        n[20] = "median_resid_kurt";
        n[21] = "luminance_var";
        n[22] = "luminance_entropy";
        return n;
    }();
    return names;
}

namespace {

int reflect_index(int i, int n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
    return std::clamp(i, 0, n - 1);
}

double median_inplace(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    return v[mid];
}

}  // namespace

FeatureVector extract_features(const Image& img) {
    validate_image(img);
    if (img.height < 64 || img.width < 64)
        throw std::invalid_argument("feature extraction requires images of at least 64x64");

    const int h = img.height, w = img.width;
    const Plane lum = luminance(img);
    const std::size_t n = lum.values.size();

    FeatureVector fv;

    // --- spectral block: unitary FFT so features are size-comparable ---
    {
        std::vector<std::complex<double>> grid(n);
        for (std::size_t i = 0; i < n; ++i) grid[i] = {lum.values[i], 0.0};
        fft2(grid, h, w, false);
        const double unit = 1.0 / std::sqrt(static_cast<double>(n));

        double bin_sum[16] = {};
        std::size_t bin_count[16] = {};
        double total = 0.0, high = 0.0;
        for (int u = 0; u < h; ++u) {
            const int fu = (u <= h / 2) ? u : u - h;
            const double ny = std::abs(fu) / (h / 2.0);
            for (int v = 0; v < w; ++v) {
                if (u == 0 && v == 0) continue;
                const int fvq = (v <= w / 2) ? v : v - w;
                const double nx = std::abs(fvq) / (w / 2.0);
                const double r = std::hypot(ny, nx);
                const double mag = std::abs(grid[static_cast<std::size_t>(u) * w + v]) * unit;
                const int bin = std::min(15, static_cast<int>(std::min(r, 1.0) * 16.0));
                bin_sum[bin] += std::log1p(mag);
                bin_count[bin]++;
                const double e = mag * mag;
                total += e;
                if (r > 0.5) high += e;
            }
        }
        for (int b = 0; b < 16; ++b)
            fv.values[b] = bin_count[b] ? bin_sum[b] / static_cast<double>(bin_count[b]) : 0.0;
        fv.values[16] = total > 0.0 ? high / total : 0.0;
    }

    // --- noise estimate: MAD of the 3x3 Laplacian, scaled to an std and by
    //     the kernel norm sqrt(20) ---
    {
        std::vector<double> lap;
        lap.reserve(n);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double v = lum.at(reflect_index(y - 1, h), x) +
                                 lum.at(reflect_index(y + 1, h), x) +
                                 lum.at(y, reflect_index(x - 1, w)) +
                                 lum.at(y, reflect_index(x + 1, w)) - 4.0 * lum.at(y, x);
                lap.push_back(v);
            }
        std::vector<double> tmp = lap;
        const double med = median_inplace(tmp);
        for (std::size_t i = 0; i < lap.size(); ++i) tmp[i] = std::abs(lap[i] - med);
        const double mad = median_inplace(tmp);
        fv.values[17] = mad / 0.6745 / std::sqrt(20.0);
    }

    // --- blockiness: gradient magnitude on 8-pixel grid boundaries vs off ---
    {
        double on_sum = 0.0, off_sum = 0.0;
        std::size_t on_cnt = 0, off_cnt = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x + 1 < w; ++x) {
                const double g = std::abs(lum.at(y, x + 1) - lum.at(y, x));
                if ((x + 1) % 8 == 0) {
                    on_sum += g;
                    ++on_cnt;
                } else {
                    off_sum += g;
                    ++off_cnt;
                }
            }
        for (int y = 0; y + 1 < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double g = std::abs(lum.at(y + 1, x) - lum.at(y, x));
                if ((y + 1) % 8 == 0) {
                    on_sum += g;
                    ++on_cnt;
                } else {
                    off_sum += g;
                    ++off_cnt;
                }
            }
        const double on_mean = on_cnt ? on_sum / on_cnt : 0.0;
        const double off_mean = off_cnt ? off_sum / off_cnt : 0.0;
        fv.values[18] = off_mean > 0.0 ? on_mean / off_mean : 1.0;
    }

    // --- median residual statistics (3x3 median filter) ---
    {
        std::vector<double> resid(n);
        std::vector<double> patch(9);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                std::size_t k = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        patch[k++] = lum.at(reflect_index(y + dy, h), reflect_index(x + dx, w));
                std::nth_element(patch.begin(), patch.begin() + 4, patch.end());
                resid[static_cast<std::size_t>(y) * w + x] = lum.at(y, x) - patch[4];
            }
        double mean = 0.0;
        for (double v : resid) mean += v;
        mean /= static_cast<double>(n);
        double m2 = 0.0, m4 = 0.0;
        for (double v : resid) {
            const double d = v - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        m2 /= static_cast<double>(n);
        m4 /= static_cast<double>(n);
        fv.values[19] = m2;
        fv.values[20] = m2 > 1e-24 ? m4 / (m2 * m2) - 3.0 : 0.0;
    }

    // --- global luminance statistics ---
    {
        double mean = 0.0;
        for (double v : lum.values) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : lum.values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        fv.values[21] = var;

        std::size_t hist[256] = {};
        for (double v : lum.values) {
            const int b = std::clamp(static_cast<int>(std::floor(v * 255.0 + 0.5)), 0, 255);
            hist[b]++;
        }
        double entropy = 0.0;
        for (std::size_t c : hist) {
            if (!c) continue;
            const double p = static_cast<double>(c) / static_cast<double>(n);
            entropy -= p * std::log2(p);
        }
        fv.values[22] = entropy;
    }

    return fv;
}

}  // namespace wrd
