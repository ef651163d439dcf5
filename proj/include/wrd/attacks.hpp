#pragma once

#include <cstdint>
#include <string>

#include "wrd/image.hpp"
#include "wrd/transforms.hpp"

namespace wrd {

enum class AttackFamily {
    GaussianNoise,
    GaussianBlur,
    ResizeCycle,
    JpegLike,
    MedianDenoise,
    TvDenoise,
    Identity,
};

enum class AttackRole { Removal, Postprocess };

/// Named, parameterized removal attack or post-processing transform.
/// Serializes to the compact grammar family(param=value,...), e.g.
/// "gaussian_noise(sigma=0.05)".
struct AttackSpec {
    AttackFamily family = AttackFamily::Identity;
    AttackRole role = AttackRole::Removal;
    double sigma = 0.0;       // gaussian_noise, in (0, 0.5]
    double radius = 0.0;      // gaussian_blur, in (0, 8]
    double scale = 0.0;       // resize_cycle, in (0, 2]
    int quality = 0;          // jpeg_like, in [1, 100]
    int window = 0;           // median_denoise, odd >= 3
    double weight = 0.0;      // tv_denoise, in (0, 5]
    int iterations = 0;       // tv_denoise, in [1, 1000]

    std::string to_string() const;
    static AttackSpec parse(const std::string& text);

    static AttackSpec identity();
    static AttackSpec gaussian_noise(double sigma);
    static AttackSpec gaussian_blur(double radius);
    static AttackSpec resize_cycle(double scale);
    static AttackSpec jpeg(int quality);
    static AttackSpec median_denoise(int window);
    static AttackSpec tv_denoise(double weight, int iterations = 20);
};

/// Validates parameter ranges; throws std::invalid_argument.
void validate_spec(const AttackSpec& spec);

/// Applies the attack. Deterministic for a fixed (img, spec, seed); output is
/// clamped to [0,1] and keeps the input dimensions.
Image apply_attack(const Image& img, const AttackSpec& spec, std::uint64_t rng_seed);

/// In-memory JPEG-shaped transform: 8x8 block DCT per channel, AC quantization
/// by the standard luminance table under the libjpeg quality law, dequantize,
/// inverse. The DC coefficient passes through unquantized so constant images
/// are reproduced exactly. No entropy coding.
Image jpeg_like(const Image& img, int quality);

/// Residual and spectrum diagnostics for a removal attack.
struct ResidualDiagnostics {
    Image residual_display;       // 0.5-centered difference, clamped
    Spectrum spectrum;            // of the raw luminance residual
    double hf_energy_fraction = 0.0;
};

ResidualDiagnostics compute_residual_diagnostics(const Image& original, const Image& variant);

}  // namespace wrd
