#include "wrd/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wrd/rng.hpp"

namespace wrd {

const char* to_string(SynthKind kind) {
    switch (kind) {
        case SynthKind::Texture: return "texture";
        case SynthKind::Gradient: return "gradient";
        case SynthKind::Shapes: return "shapes";
    }
    return "texture";
}

SynthKind synth_kind_from_string(const std::string& name) {
    if (name == "texture") return SynthKind::Texture;
    if (name == "gradient") return SynthKind::Gradient;
    if (name == "shapes") return SynthKind::Shapes;
    throw std::invalid_argument("unknown synth kind: " + name);
}

void validate_image(const Image& img) {
    if (img.height <= 0 || img.width <= 0)
        throw std::invalid_argument("zero-dimension image");
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("channel count must be 1 or 3");
    if (img.data.size() != static_cast<std::size_t>(img.height) * img.width * img.channels)
        throw std::invalid_argument("image data length does not match dimensions");
    for (double v : img.data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw std::invalid_argument("image sample outside [0,1]");
    }
}

Plane luminance(const Image& img) {
    Plane out(img.height, img.width);
    const std::size_t n = img.pixel_count();
    if (img.channels == 1) {
        std::copy(img.data.begin(), img.data.end(), out.values.begin());
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = &img.data[i * 3];
        out.values[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
    return out;
}

double clamp01(Image& img) {
    std::size_t clipped = 0;
    for (double& v : img.data) {
        if (v < 0.0) {
            v = 0.0;
            ++clipped;
        } else if (v > 1.0) {
            v = 1.0;
            ++clipped;
        }
    }
    return img.data.empty() ? 0.0 : static_cast<double>(clipped) / img.data.size();
}

namespace {

// Separable Gaussian blur of a plane, reflected boundaries.
Plane blur_plane(const Plane& src, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int i = 0; i <= radius; ++i) {
        kernel[i] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += (i == 0) ? kernel[i] : 2.0 * kernel[i];
    }
    for (double& k : kernel) k /= sum;

    const int h = src.height, w = src.width;
    auto reflect = [](int i, int n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
        return std::clamp(i, 0, n - 1);
    };

    Plane tmp(h, w), out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = kernel[0] * src.at(y, x);
            for (int k = 1; k <= radius; ++k)
                acc += kernel[k] * (src.at(y, reflect(x - k, w)) + src.at(y, reflect(x + k, w)));
            tmp.at(y, x) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = kernel[0] * tmp.at(y, x);
            for (int k = 1; k <= radius; ++k)
                acc += kernel[k] * (tmp.at(reflect(y - k, h), x) + tmp.at(reflect(y + k, h), x));
            out.at(y, x) = acc;
        }
    return out;
}

Plane gaussian_field(Rng& rng, int h, int w) {
    Plane p(h, w);
    for (double& v : p.values) v = rng.next_gaussian();
    return p;
}

void normalize_unit_std(Plane& p) {
    double mean = 0.0;
    for (double v : p.values) mean += v;
    mean /= static_cast<double>(p.values.size());
    double var = 0.0;
    for (double v : p.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(p.values.size());
    const double s = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (double& v : p.values) v = (v - mean) * s;
}

// Broadband low-amplitude noise floor with a per-image random spectral shape.
// Covers vary in how much mid/high-frequency content they carry, which mirrors
// the spread of texture statistics in natural photos.
Plane noise_floor(Rng& rng, int h, int w, double amp_lo, double amp_hi) {
    const double amp = std::exp(rng.next_range(std::log(amp_lo), std::log(amp_hi)));
    const double mix = rng.next_range(0.0, 0.5);  // weight of the low-passed part
    Plane white = gaussian_field(rng, h, w);
    Plane colored = blur_plane(gaussian_field(rng, h, w), rng.next_range(0.6, 1.5));
    normalize_unit_std(colored);
    Plane out(h, w);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = amp * ((1.0 - mix) * white.values[i] + mix * colored.values[i]);
    return out;
}

// Oriented linear ramp in [lo, hi].
Plane gradient_plane(Rng& rng, int h, int w, bool axis_aligned) {
    const double lo = rng.next_range(0.22, 0.42);
    const double hi = lo + rng.next_range(0.28, 0.5);
    Plane p(h, w);
    if (axis_aligned) {
        const bool horizontal = rng.next_bool();
        const bool flip = rng.next_bool();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double t = horizontal ? static_cast<double>(x) / (w - 1)
                                      : static_cast<double>(y) / (h - 1);
                if (flip) t = 1.0 - t;
                p.at(y, x) = lo + (hi - lo) * t;
            }
        return p;
    }
    const double theta = rng.next_range(0.0, 2.0 * 3.14159265358979323846);
    const double cx = std::cos(theta), sy = std::sin(theta);
    double pmin = 1e300, pmax = -1e300;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double t = cx * x / (w - 1) + sy * y / (h - 1);
            pmin = std::min(pmin, t);
            pmax = std::max(pmax, t);
        }
    const double scale = (pmax > pmin) ? 1.0 / (pmax - pmin) : 1.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double t = (cx * x / (w - 1) + sy * y / (h - 1) - pmin) * scale;
            p.at(y, x) = lo + (hi - lo) * t;
        }
    return p;
}

void add_shapes(Rng& rng, Plane& canvas) {
    const int h = canvas.height, w = canvas.width;
    const int count = rng.next_int(4, 9);
    for (int s = 0; s < count; ++s) {
        const bool disk = rng.next_bool();
        const double cx = rng.next_range(0.1, 0.9) * w;
        const double cy = rng.next_range(0.1, 0.9) * h;
        const double radius = rng.next_range(0.06, 0.22) * std::min(h, w);
        const double delta = (rng.next_bool() ? 1.0 : -1.0) * rng.next_range(0.10, 0.28);
        const double edge = rng.next_range(2.5, 4.5);  // soft edge width in pixels
        const double rx = disk ? radius : radius * rng.next_range(0.6, 1.6);
        const double ry = disk ? radius : radius * rng.next_range(0.6, 1.6);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double d;
                if (disk) {
                    d = std::hypot(x - cx, y - cy) - radius;
                } else {
                    // signed distance to an axis-aligned box
                    const double dx = std::abs(x - cx) - rx;
                    const double dy = std::abs(y - cy) - ry;
                    d = std::max(dx, dy);
                }
                const double mask = 1.0 / (1.0 + std::exp(d / edge));
                canvas.at(y, x) += delta * mask;
            }
    }
}

// Linear squeeze into [0.02, 0.98] when the composition exceeds it; a linear
// map keeps the spectrum shape intact (no clipping harmonics).
void fit_range(Plane& p) {
    double lo = 1e300, hi = -1e300;
    for (double v : p.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo >= 0.02 && hi <= 0.98) return;
    const double span = std::max(hi - lo, 1e-12);
    for (double& v : p.values) v = 0.02 + 0.96 * (v - lo) / span;
}

}  // namespace

Image synth_image(std::uint64_t seed, int height, int width, SynthKind kind, int channels) {
    if (height < 64 || width < 64)
        throw std::invalid_argument("synthetic images must be at least 64x64");
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("channel count must be 1 or 3");

    Rng rng(derive_seed(seed, std::string("synth|") + to_string(kind)) ^
            (static_cast<std::uint64_t>(height) << 32 | static_cast<std::uint64_t>(width)));

    Plane base(height, width);
    switch (kind) {
        case SynthKind::Texture: {
            base = gradient_plane(rng, height, width, false);
            Plane cloud = blur_plane(gaussian_field(rng, height, width), rng.next_range(4.5, 6.0));
            normalize_unit_std(cloud);
            const double amp = rng.next_range(0.06, 0.11);
            for (std::size_t i = 0; i < base.values.size(); ++i)
                base.values[i] += amp * cloud.values[i];
            Plane floor = noise_floor(rng, height, width, 0.002, 0.006);
            for (std::size_t i = 0; i < base.values.size(); ++i)
                base.values[i] += floor.values[i];
            break;
        }
        case SynthKind::Gradient: {
            base = gradient_plane(rng, height, width, true);
            Plane floor = noise_floor(rng, height, width, 0.005, 0.010);
            for (std::size_t i = 0; i < base.values.size(); ++i)
                base.values[i] += floor.values[i];
            break;
        }
        case SynthKind::Shapes: {
            base = gradient_plane(rng, height, width, false);
            add_shapes(rng, base);
            Plane floor = noise_floor(rng, height, width, 0.003, 0.008);
            for (std::size_t i = 0; i < base.values.size(); ++i)
                base.values[i] += floor.values[i];
            break;
        }
    }
    fit_range(base);

    Image img(height, width, channels);
    if (channels == 1) {
        img.data = base.values;
    } else {
        // mild per-channel tint so RGB covers are not exactly gray
        double tint[3] = {rng.next_range(-0.02, 0.02), rng.next_range(-0.02, 0.02),
                          rng.next_range(-0.02, 0.02)};
        for (std::size_t i = 0; i < base.values.size(); ++i)
            for (int c = 0; c < 3; ++c)
                img.data[i * 3 + c] = base.values[i] + tint[c] * (base.values[i] - 0.5) * 2.0;
    }
    clamp01(img);
    validate_image(img);
    return img;
}

}  // namespace wrd
