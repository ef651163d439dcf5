#include "wrd/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "wrd/rng.hpp"

namespace wrd {

namespace {

const char* family_name(AttackFamily f) {
    switch (f) {
        case AttackFamily::GaussianNoise: return "gaussian_noise";
        case AttackFamily::GaussianBlur: return "gaussian_blur";
        case AttackFamily::ResizeCycle: return "resize_cycle";
        case AttackFamily::JpegLike: return "jpeg_like";
        case AttackFamily::MedianDenoise: return "median_denoise";
        case AttackFamily::TvDenoise: return "tv_denoise";
        case AttackFamily::Identity: return "identity";
    }
    return "identity";
}

std::string format_param(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

int reflect_index(int i, int n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
    return std::clamp(i, 0, n - 1);
}

}  // namespace

AttackSpec AttackSpec::identity() {
    AttackSpec s;
    s.family = AttackFamily::Identity;
    return s;
}
AttackSpec AttackSpec::gaussian_noise(double sigma) {
    AttackSpec s;
    s.family = AttackFamily::GaussianNoise;
    s.sigma = sigma;
    return s;
}
AttackSpec AttackSpec::gaussian_blur(double radius) {
    AttackSpec s;
    s.family = AttackFamily::GaussianBlur;
    s.radius = radius;
    return s;
}
AttackSpec AttackSpec::resize_cycle(double scale) {
    AttackSpec s;
    s.family = AttackFamily::ResizeCycle;
    s.scale = scale;
    return s;
}
AttackSpec AttackSpec::jpeg(int quality) {
    AttackSpec s;
    s.family = AttackFamily::JpegLike;
    s.quality = quality;
    return s;
}
AttackSpec AttackSpec::median_denoise(int window) {
    AttackSpec s;
    s.family = AttackFamily::MedianDenoise;
    s.window = window;
    return s;
}
AttackSpec AttackSpec::tv_denoise(double weight, int iterations) {
    AttackSpec s;
    s.family = AttackFamily::TvDenoise;
    s.weight = weight;
    s.iterations = iterations;
    return s;
}

void validate_spec(const AttackSpec& spec) {
    switch (spec.family) {
        case AttackFamily::GaussianNoise:
            if (!(spec.sigma > 0.0 && spec.sigma <= 0.5))
                throw std::invalid_argument("gaussian_noise sigma must be in (0, 0.5]");
            break;
        case AttackFamily::GaussianBlur:
            if (!(spec.radius > 0.0 && spec.radius <= 8.0))
                throw std::invalid_argument("gaussian_blur radius must be in (0, 8]");
            break;
        case AttackFamily::ResizeCycle:
            if (!(spec.scale > 0.0 && spec.scale <= 2.0))
                throw std::invalid_argument("resize_cycle scale must be in (0, 2]");
            break;
        case AttackFamily::JpegLike:
            if (spec.quality < 1 || spec.quality > 100)
                throw std::invalid_argument("jpeg_like quality must be in [1, 100]");
            break;
        case AttackFamily::MedianDenoise:
            if (spec.window < 3 || spec.window % 2 == 0)
                throw std::invalid_argument("median_denoise window must be odd and >= 3");
            break;
        case AttackFamily::TvDenoise:
            if (!(spec.weight > 0.0 && spec.weight <= 5.0))
                throw std::invalid_argument("tv_denoise weight must be in (0, 5]");
            if (spec.iterations < 1 || spec.iterations > 1000)
                throw std::invalid_argument("tv_denoise iterations must be in [1, 1000]");
            break;
        case AttackFamily::Identity:
            break;
    }
}

std::string AttackSpec::to_string() const {
    std::string out = family_name(family);
    switch (family) {
        case AttackFamily::GaussianNoise: return out + "(sigma=" + format_param(sigma) + ")";
        case AttackFamily::GaussianBlur: return out + "(radius=" + format_param(radius) + ")";
        case AttackFamily::ResizeCycle: return out + "(scale=" + format_param(scale) + ")";
        case AttackFamily::JpegLike: return out + "(quality=" + std::to_string(quality) + ")";
        case AttackFamily::MedianDenoise: return out + "(window=" + std::to_string(window) + ")";
        case AttackFamily::TvDenoise:
            return out + "(weight=" + format_param(weight) +
                   ",iterations=" + std::to_string(iterations) + ")";
        case AttackFamily::Identity: return out + "()";
    }
    return out;
}

AttackSpec AttackSpec::parse(const std::string& text) {
    const auto open = text.find('(');
    std::string name = (open == std::string::npos) ? text : text.substr(0, open);
    // trim
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
    std::size_t start = 0;
    while (start < name.size() && std::isspace(static_cast<unsigned char>(name[start]))) ++start;
    name = name.substr(start);

    std::map<std::string, double> params;
    if (open != std::string::npos) {
        const auto close = text.rfind(')');
        if (close == std::string::npos || close < open)
            throw std::invalid_argument("malformed attack spec: " + text);
        std::string body = text.substr(open + 1, close - open - 1);
        std::size_t pos = 0;
        while (pos < body.size()) {
            auto comma = body.find(',', pos);
            if (comma == std::string::npos) comma = body.size();
            std::string item = body.substr(pos, comma - pos);
            pos = comma + 1;
            if (item.find_first_not_of(" \t") == std::string::npos) continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("malformed attack parameter: " + item);
            std::string k = item.substr(0, eq);
            std::string v = item.substr(eq + 1);
            k.erase(std::remove_if(k.begin(), k.end(), ::isspace), k.end());
            try {
                params[k] = std::stod(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("malformed attack parameter value: " + item);
            }
        }
    }

    auto need = [&](const char* k) {
        auto it = params.find(k);
        if (it == params.end())
            throw std::invalid_argument(std::string("attack spec misses parameter '") + k +
                                        "': " + text);
        return it->second;
    };

    AttackSpec s;
    if (name == "gaussian_noise") {
        s = gaussian_noise(need("sigma"));
    } else if (name == "gaussian_blur") {
        s = gaussian_blur(need("radius"));
    } else if (name == "resize_cycle") {
        s = resize_cycle(need("scale"));
    } else if (name == "jpeg_like") {
        s = jpeg(static_cast<int>(std::lround(need("quality"))));
    } else if (name == "median_denoise") {
        s = median_denoise(static_cast<int>(std::lround(need("window"))));
    } else if (name == "tv_denoise") {
        s = tv_denoise(need("weight"),
                       params.count("iterations")
                           ? static_cast<int>(std::lround(params.at("iterations")))
                           : 20);
    } else if (name == "identity") {
        s = identity();
    } else {
        throw std::invalid_argument("unknown attack family: " + name);
    }
    validate_spec(s);
    return s;
}

namespace {

Image gaussian_noise_attack(const Image& img, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    Image out = img;
    for (double& v : out.data) v += sigma * rng.next_gaussian();
    clamp01(out);
    return out;
}

Image gaussian_blur_attack(const Image& img, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int i = 0; i <= radius; ++i) {
        kernel[i] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += (i == 0) ? kernel[i] : 2.0 * kernel[i];
    }
    for (double& k : kernel) k /= sum;

    const int h = img.height, w = img.width, ch = img.channels;
    Image tmp(h, w, ch), out(h, w, ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = kernel[0] * img.at(y, x, c);
                for (int k = 1; k <= radius; ++k)
                    acc += kernel[k] *
                           (img.at(y, reflect_index(x - k, w), c) +
                            img.at(y, reflect_index(x + k, w), c));
                tmp.at(y, x, c) = acc;
            }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = kernel[0] * tmp.at(y, x, c);
                for (int k = 1; k <= radius; ++k)
                    acc += kernel[k] *
                           (tmp.at(reflect_index(y - k, h), x, c) +
                            tmp.at(reflect_index(y + k, h), x, c));
                out.at(y, x, c) = acc;
            }
    clamp01(out);
    return out;
}

Image bilinear_resize(const Image& img, int nh, int nw) {
    Image out(nh, nw, img.channels);
    const double sy = static_cast<double>(img.height) / nh;
    const double sx = static_cast<double>(img.width) / nw;
    for (int y = 0; y < nh; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, img.height - 1);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = std::clamp(fy - y0, 0.0, 1.0);
        for (int x = 0; x < nw; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, img.width - 1);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = std::clamp(fx - x0, 0.0, 1.0);
            for (int c = 0; c < img.channels; ++c) {
                const double top = img.at(y0, x0, c) * (1 - wx) + img.at(y0, x1, c) * wx;
                const double bot = img.at(y1, x0, c) * (1 - wx) + img.at(y1, x1, c) * wx;
                out.at(y, x, c) = top * (1 - wy) + bot * wy;
            }
        }
    }
    return out;
}

Image resize_cycle_attack(const Image& img, double scale) {
    const int nh = std::max(1, static_cast<int>(std::lround(img.height * scale)));
    const int nw = std::max(1, static_cast<int>(std::lround(img.width * scale)));
    Image small = bilinear_resize(img, nh, nw);
    Image out = bilinear_resize(small, img.height, img.width);
    clamp01(out);
    return out;
}

Image median_denoise_attack(const Image& img, int window) {
    const int r = window / 2;
    const int h = img.height, w = img.width, ch = img.channels;
    Image out(h, w, ch);
    std::vector<double> patch(static_cast<std::size_t>(window) * window);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                std::size_t n = 0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx)
                        patch[n++] = img.at(reflect_index(y + dy, h), reflect_index(x + dx, w), c);
                auto mid = patch.begin() + static_cast<std::ptrdiff_t>(n / 2);
                std::nth_element(patch.begin(), mid, patch.begin() + static_cast<std::ptrdiff_t>(n));
                out.at(y, x, c) = *mid;
            }
    return out;
}

// Explicit gradient descent on 0.5*||x - y||^2 + weight * TV_eps(x).
Image tv_denoise_attack(const Image& img, double weight, int iterations) {
    constexpr double kStep = 0.25;
    constexpr double kEps = 1e-3;
    const int h = img.height, w = img.width, ch = img.channels;
    Image x = img;
    Plane gx(h, w), gy(h, w), nx(h, w), ny(h, w);
    for (int c = 0; c < ch; ++c) {
        for (int it = 0; it < iterations; ++it) {
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    const double v = x.at(yy, xx, c);
                    gx.at(yy, xx) = (xx + 1 < w ? x.at(yy, xx + 1, c) - v : 0.0);
                    gy.at(yy, xx) = (yy + 1 < h ? x.at(yy + 1, xx, c) - v : 0.0);
                    const double mag =
                        std::sqrt(gx.at(yy, xx) * gx.at(yy, xx) + gy.at(yy, xx) * gy.at(yy, xx) +
                                  kEps * kEps);
                    nx.at(yy, xx) = gx.at(yy, xx) / mag;
                    ny.at(yy, xx) = gy.at(yy, xx) / mag;
                }
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    const double div = (nx.at(yy, xx) - (xx > 0 ? nx.at(yy, xx - 1) : 0.0)) +
                                       (ny.at(yy, xx) - (yy > 0 ? ny.at(yy - 1, xx) : 0.0));
                    const double grad = (x.at(yy, xx, c) - img.at(yy, xx, c)) - weight * div;
                    x.at(yy, xx, c) -= kStep * grad;
                }
        }
    }
    clamp01(x);
    return x;
}

// libjpeg quality law applied to the standard luminance table.
const int kJpegLuminanceTable[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
};

}  // namespace

Image jpeg_like(const Image& img, int quality) {
    validate_image(img);
    if (quality < 1 || quality > 100)
        throw std::invalid_argument("jpeg_like quality must be in [1, 100]");

    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    double quant[64];
    for (int i = 0; i < 64; ++i) {
        const int q = std::clamp((kJpegLuminanceTable[i] * scale + 50) / 100, 1, 255);
        quant[i] = static_cast<double>(q);
    }

    const int h = img.height, w = img.width, ch = img.channels;
    const int bh = (h + 7) / 8 * 8, bw = (w + 7) / 8 * 8;
    Image out = img;
    Plane block(8, 8);
    for (int c = 0; c < ch; ++c) {
        // channel plane in JPEG's 0..255 domain, edge-replicated to 8k x 8m
        Plane plane(bh, bw);
        for (int y = 0; y < bh; ++y)
            for (int x = 0; x < bw; ++x)
                plane.at(y, x) = img.at(std::min(y, h - 1), std::min(x, w - 1), c) * 255.0 - 128.0;

        for (int by = 0; by < bh; by += 8)
            for (int bx = 0; bx < bw; bx += 8) {
                for (int y = 0; y < 8; ++y)
                    for (int x = 0; x < 8; ++x) block.at(y, x) = plane.at(by + y, bx + x);
                Plane coeffs = dct2(block);
                for (int i = 1; i < 64; ++i) {
                    // DC (i == 0) passes through so flat blocks reproduce exactly
                    const double q = quant[i];
                    coeffs.values[i] = std::floor(coeffs.values[i] / q + 0.5) * q;
                }
                Plane rec = idct2(coeffs);
                for (int y = 0; y < 8; ++y)
                    for (int x = 0; x < 8; ++x) plane.at(by + y, bx + x) = rec.at(y, x);
            }

        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(y, x, c) = (plane.at(y, x) + 128.0) / 255.0;
    }
    clamp01(out);
    return out;
}

Image apply_attack(const Image& img, const AttackSpec& spec, std::uint64_t rng_seed) {
    validate_image(img);
    validate_spec(spec);
    switch (spec.family) {
        case AttackFamily::GaussianNoise:
            return gaussian_noise_attack(img, spec.sigma, rng_seed);
        case AttackFamily::GaussianBlur:
            return gaussian_blur_attack(img, spec.radius);
        case AttackFamily::ResizeCycle:
            return resize_cycle_attack(img, spec.scale);
        case AttackFamily::JpegLike:
            return jpeg_like(img, spec.quality);
        case AttackFamily::MedianDenoise:
            return median_denoise_attack(img, spec.window);
        case AttackFamily::TvDenoise:
            return tv_denoise_attack(img, spec.weight, spec.iterations);
        case AttackFamily::Identity:
            return img;
    }
    return img;
}

ResidualDiagnostics compute_residual_diagnostics(const Image& original, const Image& variant) {
    if (original.height != variant.height || original.width != variant.width ||
        original.channels != variant.channels)
        throw std::invalid_argument("residual diagnostics require matching dimensions");

    ResidualDiagnostics diag;
    diag.residual_display = Image(original.height, original.width, original.channels);
    for (std::size_t i = 0; i < original.data.size(); ++i)
        diag.residual_display.data[i] = 0.5 + (variant.data[i] - original.data[i]);
    clamp01(diag.residual_display);

    const Plane lum_orig = luminance(original);
    const Plane lum_var = luminance(variant);
    Plane residual(original.height, original.width);
    for (std::size_t i = 0; i < residual.values.size(); ++i)
        residual.values[i] = lum_var.values[i] - lum_orig.values[i];

    diag.spectrum = fourier_log_spectrum(residual);
    diag.hf_energy_fraction = high_frequency_energy_fraction(residual);
    return diag;
}

}  // namespace wrd
