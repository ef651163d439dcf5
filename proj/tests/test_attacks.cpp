#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "wrd/attacks.hpp"
#include "wrd/features.hpp"
#include "wrd/image.hpp"
#include "wrd/metrics.hpp"
#include "wrd/rng.hpp"
#include "wrd/transforms.hpp"

using namespace wrd;

TEST_CASE("attack spec grammar roundtrips") {
    const char* specs[] = {
        "gaussian_noise(sigma=0.05)", "gaussian_blur(radius=2)",    "resize_cycle(scale=0.5)",
        "jpeg_like(quality=80)",      "median_denoise(window=5)",   "identity()",
        "tv_denoise(weight=0.1,iterations=20)",
    };
    for (const char* s : specs) {
        const AttackSpec spec = AttackSpec::parse(s);
        CHECK(spec.to_string() == s);
        CHECK(AttackSpec::parse(spec.to_string()).to_string() == s);
    }
    CHECK(AttackSpec::parse("identity").family == AttackFamily::Identity);
    CHECK(AttackSpec::parse(" gaussian_blur(radius=1.5) ").radius == doctest::Approx(1.5));
}

TEST_CASE("attack spec rejects malformed or out-of-range input") {
    CHECK_THROWS_AS(AttackSpec::parse("unknown_family(x=1)"), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::parse("gaussian_noise(sigma=0.9)"), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::parse("gaussian_noise()"), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::parse("gaussian_noise(sigma=abc)"), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::parse("jpeg_like(quality=0)"), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::parse("median_denoise(window=4)"), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::parse("resize_cycle(scale=3)"), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::parse("gaussian_blur(radius"), std::invalid_argument);
}

TEST_CASE("identity attack is bit-identical") {
    const Image img = synth_image(1, 64, 64, SynthKind::Texture);
    const Image out = apply_attack(img, AttackSpec::identity(), 123);
    CHECK(out.data == img.data);
}

TEST_CASE("attacks are deterministic per (image, spec, seed)") {
    const Image img = synth_image(2, 64, 64, SynthKind::Texture);
    const AttackSpec spec = AttackSpec::gaussian_noise(0.05);
    CHECK(apply_attack(img, spec, 7).data == apply_attack(img, spec, 7).data);
    CHECK(apply_attack(img, spec, 7).data != apply_attack(img, spec, 8).data);
}

TEST_CASE("gaussian noise has the requested standard deviation") {
    const Image img(256, 256, 1, 0.5);
    const Image noisy = apply_attack(img, AttackSpec::gaussian_noise(0.1), 99);
    double mean = 0.0;
    for (double v : noisy.data) mean += v;
    mean /= static_cast<double>(noisy.data.size());
    double var = 0.0;
    for (double v : noisy.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(noisy.data.size());
    CHECK(std::abs(std::sqrt(var) - 0.1) <= 0.005);
}

TEST_CASE("gaussian blur removes high-frequency energy") {
    // white noise via the attack itself keeps this test self-contained
    const Image flat(128, 128, 1, 0.5);
    const Image white = apply_attack(flat, AttackSpec::gaussian_noise(0.15), 5);
    const Image blurred = apply_attack(white, AttackSpec::gaussian_blur(2.0), 6);
    CHECK(high_frequency_energy_fraction(luminance(blurred)) <
          high_frequency_energy_fraction(luminance(white)));
}

TEST_CASE("jpeg_like at quality 100 is near-lossless") {
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
        const Image img = synth_image(700 + s, 128, 128, SynthKind::Texture);
        const Image out = jpeg_like(img, 100);
        for (std::size_t i = 0; i < img.data.size(); ++i)
            worst = std::max(worst, std::abs(img.data[i] - out.data[i]));
    }
    CHECK(worst <= 0.01);
}

TEST_CASE("jpeg_like reproduces constant images exactly at any quality") {
    for (int quality : {10, 50, 60, 90, 100}) {
        const Image img(64, 64, 3, 0.431);
        const Image out = jpeg_like(img, quality);
        CHECK(out.data == img.data);
    }
    CHECK_THROWS_AS(jpeg_like(Image(64, 64, 1, 0.5), 0), std::invalid_argument);
    CHECK_THROWS_AS(jpeg_like(Image(64, 64, 1, 0.5), 101), std::invalid_argument);
}

TEST_CASE("jpeg_like raises blockiness on textured images") {
    int higher = 0;
    const int trials = 20;
    for (int s = 0; s < trials; ++s) {
        const Image img = synth_image(900 + s, 128, 128, SynthKind::Texture);
        const double before = extract_features(img).values[18];
        const double after = extract_features(jpeg_like(img, 60)).values[18];
        if (after > before) ++higher;
    }
    CHECK(higher >= trials * 9 / 10);
}

TEST_CASE("jpeg_like handles sizes that are not multiples of 8") {
    const Image img = synth_image(3, 100, 68, SynthKind::Shapes);
    const Image out = jpeg_like(img, 75);
    CHECK(out.height == 100);
    CHECK(out.width == 68);
    validate_image(out);
}

TEST_CASE("resize cycle at scale 1 is near-identity") {
    const Image img = synth_image(4, 96, 96, SynthKind::Texture);
    const Image out = apply_attack(img, AttackSpec::resize_cycle(1.0), 0);
    const PsnrValue p = psnr(img, out);
    CHECK((p.infinite || p.db >= 50.0));
}

TEST_CASE("severity increases distortion within each family") {
    struct FamilyCase {
        const char* name;
        AttackSpec specs[3];
    };
    const FamilyCase cases[] = {
        {"noise",
         {AttackSpec::gaussian_noise(0.02), AttackSpec::gaussian_noise(0.05),
          AttackSpec::gaussian_noise(0.10)}},
        {"blur",
         {AttackSpec::gaussian_blur(1.0), AttackSpec::gaussian_blur(2.0),
          AttackSpec::gaussian_blur(3.0)}},
        {"resize",
         {AttackSpec::resize_cycle(0.75), AttackSpec::resize_cycle(0.5),
          AttackSpec::resize_cycle(0.25)}},
        {"jpeg", {AttackSpec::jpeg(95), AttackSpec::jpeg(80), AttackSpec::jpeg(60)}},
        {"median",
         {AttackSpec::median_denoise(3), AttackSpec::median_denoise(5),
          AttackSpec::median_denoise(7)}},
        {"tv",
         {AttackSpec::tv_denoise(0.05, 20), AttackSpec::tv_denoise(0.1, 20),
          AttackSpec::tv_denoise(0.2, 20)}},
    };
    const int trials = 20;
    for (const auto& fc : cases) {
        double mean_psnr[3] = {};
        for (int s = 0; s < trials; ++s) {
            const Image img = synth_image(1100 + s, 96, 96, static_cast<SynthKind>(s % 3));
            for (int level = 0; level < 3; ++level) {
                const Image out = apply_attack(img, fc.specs[level],
                                               derive_seed(1, std::to_string(s * 3 + level)));
                const PsnrValue p = psnr(img, out);
                mean_psnr[level] += (p.infinite ? 100.0 : p.db) / trials;
            }
        }
        int inversions = 0;
        double worst = 0.0;
        for (int level = 1; level < 3; ++level)
            if (mean_psnr[level] > mean_psnr[level - 1]) {
                ++inversions;
                worst = std::max(worst, mean_psnr[level] - mean_psnr[level - 1]);
            }
        INFO(fc.name);
        CHECK(inversions <= 1);
        CHECK(worst <= 0.2);
    }
}

TEST_CASE("attack outputs stay valid images") {
    const Image img = synth_image(5, 64, 64, SynthKind::Shapes);
    for (const char* s :
         {"gaussian_noise(sigma=0.3)", "gaussian_blur(radius=4)", "resize_cycle(scale=0.3)",
          "jpeg_like(quality=5)", "median_denoise(window=5)",
          "tv_denoise(weight=0.3,iterations=10)"}) {
        const Image out = apply_attack(img, AttackSpec::parse(s), 11);
        CHECK(out.height == img.height);
        CHECK(out.width == img.width);
        validate_image(out);
    }
}

TEST_CASE("residual diagnostics conventions") {
    const Image img = synth_image(6, 64, 64, SynthKind::Texture);

    // identical variant: zero residual, hf fraction 0 by convention
    const ResidualDiagnostics same = compute_residual_diagnostics(img, img);
    CHECK(same.hf_energy_fraction == doctest::Approx(0.0));
    for (double v : same.residual_display.data) CHECK(v == doctest::Approx(0.5));

    // pure checkerboard perturbation is all high-frequency
    Image checker = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double delta = ((x + y) % 2 == 0) ? 0.01 : -0.01;
            for (int c = 0; c < img.channels; ++c)
                checker.at(y, x, c) = std::clamp(checker.at(y, x, c) + delta, 0.0, 1.0);
        }
    CHECK(compute_residual_diagnostics(img, checker).hf_energy_fraction >= 0.99);

    CHECK_THROWS_AS(compute_residual_diagnostics(img, Image(32, 64, 3, 0.5)),
                    std::invalid_argument);
}

TEST_CASE("noise residuals live above half-nyquist, blur residuals below") {
    const Image img = synth_image(7, 128, 128, SynthKind::Texture);
    const Image noisy = apply_attack(img, AttackSpec::gaussian_noise(0.05), 3);
    const Image blurred = apply_attack(img, AttackSpec::gaussian_blur(2.0), 4);
    CHECK(compute_residual_diagnostics(img, noisy).hf_energy_fraction > 0.5);
    CHECK(compute_residual_diagnostics(img, blurred).hf_energy_fraction < 0.5);
}
