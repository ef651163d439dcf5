#include "wrd/watermark.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "wrd/metrics.hpp"
#include "wrd/rng.hpp"
#include "wrd/transforms.hpp"

namespace wrd {

bool in_carrier_annulus(int u, int v, int height, int width) {
    const double r = std::hypot(static_cast<double>(u) / height,
                                static_cast<double>(v) / width);
    return r >= 0.15 && r <= 0.45;
}

std::size_t carrier_capacity(int height, int width) {
    std::size_t count = 0;
    for (int u = 0; u < height; ++u)
        for (int v = 0; v < width; ++v)
            if (in_carrier_annulus(u, v, height, width)) ++count;
    return count;
}

WatermarkKey keygen(std::uint64_t seed, int n_bits, int chips_per_bit, int height, int width) {
    if (n_bits < 1 || chips_per_bit < 1)
        throw std::invalid_argument("keygen requires n_bits >= 1 and chips_per_bit >= 1");
    if (height < 1 || width < 1) throw std::invalid_argument("keygen requires positive dimensions");

    std::vector<std::uint32_t> annulus;
    annulus.reserve(carrier_capacity(height, width));
    for (int u = 0; u < height; ++u)
        for (int v = 0; v < width; ++v)
            if (in_carrier_annulus(u, v, height, width))
                annulus.push_back(static_cast<std::uint32_t>(u) * width + v);

    const std::size_t needed = static_cast<std::size_t>(n_bits) * chips_per_bit;
    if (needed > annulus.size())
        throw std::invalid_argument("payload too large for image size: need " +
                                    std::to_string(needed) + " carriers, annulus holds " +
                                    std::to_string(annulus.size()));

    Rng rng(derive_seed(seed, "watermark-key"));
    shuffle(annulus, rng);

    WatermarkKey key;
    key.seed = seed;
    key.n_bits = n_bits;
    key.chips_per_bit = chips_per_bit;
    key.height = height;
    key.width = width;
    key.coefficient_indices.assign(annulus.begin(), annulus.begin() + needed);
    key.spreading_signs.resize(needed);
    for (auto& s : key.spreading_signs) s = rng.next_bool() ? 1 : -1;
    return key;
}

namespace {

void check_key_match(const Image& img, const WatermarkKey& key) {
    if (img.height != key.height || img.width != key.width)
        throw std::invalid_argument("image dimensions do not match key");
}

}  // namespace

EmbedResult embed(const Image& img, const BitMessage& msg, const WatermarkKey& key,
                  double target_psnr_db) {
    validate_image(img);
    check_key_match(img, key);
    if (msg.n_bits() != key.n_bits)
        throw std::invalid_argument("message length does not match key payload size");

    const double hw = static_cast<double>(img.height) * img.width;
    const double chips = static_cast<double>(key.n_bits) * key.chips_per_bit;
    // exact under the orthonormal DCT, before clipping
    const double alpha = std::isinf(target_psnr_db)
                             ? 0.0
                             : std::sqrt(std::pow(10.0, -target_psnr_db / 10.0) * hw / chips);

    EmbedResult result;
    result.alpha = alpha;
    if (alpha == 0.0) {
        result.image = img;
        result.psnr_infinite = true;
        result.clipped_fraction = 0.0;
        return result;
    }

    // the carrier is synthesized directly in coefficient space, so the
    // spatial delta is an exactly linear function of the message signs
    Plane delta_coeffs(img.height, img.width);
    std::size_t idx = 0;
    for (int bit = 0; bit < key.n_bits; ++bit) {
        const double bit_sign = msg.bits[bit] ? 1.0 : -1.0;
        for (int c = 0; c < key.chips_per_bit; ++c, ++idx)
            delta_coeffs.values[key.coefficient_indices[idx]] =
                alpha * bit_sign * key.spreading_signs[idx];
    }
    const Plane delta = idct2(delta_coeffs);

    result.image = img;
    std::size_t clipped = 0;
    const std::size_t pixels = img.pixel_count();
    for (std::size_t i = 0; i < pixels; ++i) {
        for (int c = 0; c < img.channels; ++c) {
            double& v = result.image.data[i * img.channels + c];
            v += delta.values[i];
            if (v < 0.0) {
                v = 0.0;
                ++clipped;
            } else if (v > 1.0) {
                v = 1.0;
                ++clipped;
            }
        }
    }
    result.clipped_fraction = static_cast<double>(clipped) / result.image.data.size();

    const PsnrValue achieved = psnr(img, result.image);
    result.psnr_infinite = achieved.infinite;
    result.achieved_psnr = achieved.infinite ? 0.0 : achieved.db;
    return result;
}

BitMessage decode(const Image& img, const WatermarkKey& key) {
    validate_image(img);
    check_key_match(img, key);

    const Plane coeffs = dct2(luminance(img));
    BitMessage msg;
    msg.bits.resize(key.n_bits);
    std::size_t idx = 0;
    for (int bit = 0; bit < key.n_bits; ++bit) {
        double corr = 0.0;
        for (int c = 0; c < key.chips_per_bit; ++c, ++idx)
            corr += coeffs.values[key.coefficient_indices[idx]] * key.spreading_signs[idx];
        msg.bits[bit] = corr >= 0.0 ? 1 : 0;
    }
    return msg;
}

std::string key_to_json(const WatermarkKey& key, const std::string& message_hex) {
    nlohmann::ordered_json j;
    j["format"] = "wrd-key";
    j["version"] = 1;
    j["seed"] = key.seed;
    j["n_bits"] = key.n_bits;
    j["chips_per_bit"] = key.chips_per_bit;
    j["height"] = key.height;
    j["width"] = key.width;
    if (!message_hex.empty()) j["message"] = message_hex;
    return j.dump();
}

WatermarkKey key_from_json(const std::string& text, std::string* message_hex) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "wrd-key")
        throw std::runtime_error("not a watermark key document");
    WatermarkKey key = keygen(j.at("seed").get<std::uint64_t>(), j.at("n_bits").get<int>(),
                              j.at("chips_per_bit").get<int>(), j.at("height").get<int>(),
                              j.at("width").get<int>());
    if (message_hex) *message_hex = j.value("message", "");
    return key;
}

void save_key(const WatermarkKey& key, const std::string& path, const std::string& message_hex) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("unwritable path: " + path);
    out << key_to_json(key, message_hex) << "\n";
}

WatermarkKey load_key(const std::string& path, std::string* message_hex) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return key_from_json(text, message_hex);
}

}  // namespace wrd
