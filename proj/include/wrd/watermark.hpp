#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wrd/image.hpp"
#include "wrd/stats.hpp"

namespace wrd {

/// Keyed carrier layout for the blind spread-spectrum watermarker. Each
/// payload bit owns a disjoint set of chips_per_bit mid-band DCT coefficients
/// of the luminance plane plus a +-1 spreading sequence; everything is a pure
/// function of (seed, n_bits, chips_per_bit, height, width).
struct WatermarkKey {
    std::uint64_t seed = 0;
    int n_bits = 0;
    int chips_per_bit = 0;
    int height = 0;
    int width = 0;
    std::vector<std::uint32_t> coefficient_indices;  // n_bits * chips_per_bit, disjoint
    std::vector<std::int8_t> spreading_signs;        // same length, -1 or +1
};

struct EmbedResult {
    Image image;
    double achieved_psnr = 0.0;  // dB; infinite embeds cannot happen (alpha 0 keeps psnr inf)
    bool psnr_infinite = false;
    double alpha = 0.0;
    double clipped_fraction = 0.0;
};

/// Mid-band annulus test used for carrier placement: DCT index radius
/// hypot(u/h, v/w) in [0.15, 0.45] (1.0 = Nyquist per axis).
bool in_carrier_annulus(int u, int v, int height, int width);

/// Number of DCT coefficients available for carriers at this image size.
std::size_t carrier_capacity(int height, int width);

/// Deterministic key generation. Throws "payload too large for image size"
/// when n_bits * chips_per_bit exceeds the annulus capacity.
WatermarkKey keygen(std::uint64_t seed, int n_bits, int chips_per_bit, int height, int width);

/// Adds alpha * sign per chip to the luminance DCT (bit 1 -> +, bit 0 -> -),
/// with alpha = sqrt(10^(-psnr/10) * H*W / (n_bits * chips)). The luminance
/// delta is applied to every channel, which leaves chroma untouched. Output
/// is clamped; achieved PSNR and clipped fraction are measured, not assumed.
EmbedResult embed(const Image& img, const BitMessage& msg, const WatermarkKey& key,
                  double target_psnr_db);

/// Blind decode: bit i = 1 iff the correlation of the keyed coefficients with
/// the spreading signs is >= 0.
BitMessage decode(const Image& img, const WatermarkKey& key);

/// JSON (de)serialization; the expected message is optional and carried along
/// for verification convenience.
std::string key_to_json(const WatermarkKey& key, const std::string& message_hex = "");
WatermarkKey key_from_json(const std::string& text, std::string* message_hex = nullptr);
void save_key(const WatermarkKey& key, const std::string& path, const std::string& message_hex = "");
WatermarkKey load_key(const std::string& path, std::string* message_hex = nullptr);

}  // namespace wrd
