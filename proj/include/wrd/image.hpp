#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wrd {

/// Dense real-valued image, row-major, channels interleaved.
/// Intensities live in [0, 1]; every public operation that could leave the
/// range clamps explicitly and all math is double precision. Quantization to
/// 8-bit happens only at file boundaries.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 1;  // 1 or 3
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, fill) {}

    double& at(int y, int x, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t size() const { return data.size(); }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
};

/// Unconstrained real plane (DCT coefficients, residuals, luminance).
struct Plane {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    Plane() = default;
    Plane(int h, int w, double fill = 0.0)
        : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

    double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

enum class SynthKind { Texture, Gradient, Shapes };

const char* to_string(SynthKind kind);
SynthKind synth_kind_from_string(const std::string& name);

/// Throws std::invalid_argument when dimensions, channel count or data length
/// are inconsistent or any sample is outside [0, 1].
void validate_image(const Image& img);

/// Rec. 601 luminance; returns a copy of the single channel for gray inputs.
Plane luminance(const Image& img);

/// Clamps every sample to [0, 1] in place and returns the fraction of samples
/// that were out of range.
double clamp01(Image& img);

/// Deterministic synthetic cover generator. Fixed (seed, height, width, kind,
/// channels) always produces the same image; output variance is non-degenerate
/// so PSNR targets are meaningful. Minimum size 64x64.
Image synth_image(std::uint64_t seed, int height, int width, SynthKind kind, int channels = 3);

// --- file I/O (PNG and binary PPM/PGM); 8-bit at the file boundary ---

/// Reads a PNG or binary PPM/PGM file. Bytes map to [0,1] by division by 255.
/// Throws std::runtime_error for unreadable files or unsupported formats.
Image load_image(const std::string& path);

/// Writes 8-bit PNG (".png") or binary PGM/PPM (anything else); value v is
/// stored as round-half-up of v*255.
void save_image(const Image& img, const std::string& path);

}  // namespace wrd
