#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wrd/image.hpp"
#include "wrd/rng.hpp"
#include "wrd/transforms.hpp"

using namespace wrd;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "wrd_tests";
    fs::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST_CASE("pgm bytes map to [0,1] by division by 255") {
    const std::string path = temp_path("two_by_two.pgm");
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n2 2\n255\n";
        const unsigned char bytes[4] = {0, 255, 128, 64};
        out.write(reinterpret_cast<const char*>(bytes), 4);
    }
    const Image img = load_image(path);
    CHECK(img.height == 2);
    CHECK(img.width == 2);
    CHECK(img.channels == 1);
    CHECK(img.data[0] == doctest::Approx(0.0));
    CHECK(img.data[1] == doctest::Approx(1.0));
    CHECK(img.data[2] == doctest::Approx(128.0 / 255.0));
    CHECK(img.data[3] == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("save quantizes with round-half-up") {
    Image img(4, 4, 1, 0.0);
    const std::string path = temp_path("zeros.pgm");
    auto raster = [&]() {
        std::ifstream in(path, std::ios::binary);
        std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return all.substr(all.size() - 16);
    };

    save_image(img, path);
    for (char c : raster()) CHECK(static_cast<unsigned char>(c) == 0);

    for (double& v : img.data) v = 1.0;
    save_image(img, path);
    for (char c : raster()) CHECK(static_cast<unsigned char>(c) == 255);

    for (double& v : img.data) v = 0.5;  // 127.5 rounds up
    save_image(img, path);
    for (char c : raster()) CHECK(static_cast<unsigned char>(c) == 128);
}

TEST_CASE("save/load roundtrip stays within the quantization bound") {
    for (const char* name : {"rt.png", "rt.ppm"}) {
        const Image img = synth_image(3, 64, 64, SynthKind::Texture, 3);
        const std::string path = temp_path(name);
        save_image(img, path);
        const Image back = load_image(path);
        REQUIRE(back.data.size() == img.data.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < img.data.size(); ++i)
            worst = std::max(worst, std::abs(img.data[i] - back.data[i]));
        CHECK(worst <= 1.0 / 510.0 + 1e-12);
    }
}

TEST_CASE("truncated png header is an unreadable file") {
    const std::string path = temp_path("trunc.png");
    {
        std::ofstream out(path, std::ios::binary);
        const unsigned char bytes[3] = {0x89, 'P', 'N'};
        out.write(reinterpret_cast<const char*>(bytes), 3);
    }
    CHECK_THROWS_WITH_AS(load_image(path), doctest::Contains("unreadable file"),
                         std::runtime_error);
}

TEST_CASE("zero-dimension headers and unwritable paths error") {
    const std::string path = temp_path("zerodim.pgm");
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n0 2\n255\n";
    }
    CHECK_THROWS_WITH_AS(load_image(path), doctest::Contains("zero-dimension"),
                         std::runtime_error);

    const Image img(4, 4, 1, 0.5);
    CHECK_THROWS_WITH_AS(save_image(img, "/nonexistent_dir_zz/out.png"),
                         doctest::Contains("unwritable path"), std::runtime_error);
    CHECK_THROWS_WITH_AS(save_image(img, "/nonexistent_dir_zz/out.pgm"),
                         doctest::Contains("unwritable path"), std::runtime_error);
}

TEST_CASE("unsupported and missing files error") {
    const std::string path = temp_path("junk.pgm");
    {
        std::ofstream out(path, std::ios::binary);
        out << "JUNKDATA";
    }
    CHECK_THROWS_AS(load_image(path), std::runtime_error);
    CHECK_THROWS_AS(load_image(temp_path("does_not_exist.pgm")), std::runtime_error);
}

TEST_CASE("synth images are deterministic and seed-sensitive") {
    for (SynthKind kind : {SynthKind::Texture, SynthKind::Gradient, SynthKind::Shapes}) {
        const Image a = synth_image(1, 64, 64, kind);
        const Image b = synth_image(1, 64, 64, kind);
        CHECK(a.data == b.data);

        const Image c = synth_image(2, 64, 64, kind);
        std::size_t diff = 0;
        for (std::size_t i = 0; i < a.data.size(); ++i)
            if (a.data[i] != c.data[i]) ++diff;
        CHECK(diff >= a.data.size() / 100);

        double mean = 0.0;
        for (double v : a.data) mean += v;
        mean /= static_cast<double>(a.data.size());
        double var = 0.0;
        for (double v : a.data) var += (v - mean) * (v - mean);
        var /= static_cast<double>(a.data.size());
        CHECK(var > 1e-4);
    }
    CHECK_THROWS_AS(synth_image(1, 32, 64, SynthKind::Texture), std::invalid_argument);
}

TEST_CASE("gradient kind has monotone row or column means") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 17ull, 99ull}) {
        const Image img = synth_image(seed, 96, 96, SynthKind::Gradient, 1);
        auto monotone = [](const std::vector<double>& m) {
            bool inc = true, dec = true;
            for (std::size_t i = 1; i < m.size(); ++i) {
                if (m[i] < m[i - 1]) inc = false;
                if (m[i] > m[i - 1]) dec = false;
            }
            return inc || dec;
        };
        std::vector<double> row_means(img.height, 0.0), col_means(img.width, 0.0);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                row_means[y] += img.at(y, x) / img.width;
                col_means[x] += img.at(y, x) / img.height;
            }
        CHECK((monotone(row_means) || monotone(col_means)));
    }
}

TEST_CASE("dct2 of a constant image is DC-only") {
    const int n = 32;
    Plane p(n, n, 0.25);
    const Plane coeffs = dct2(p);
    CHECK(coeffs.at(0, 0) == doctest::Approx(0.25 * n).epsilon(1e-12));
    double off = 0.0;
    for (std::size_t i = 1; i < coeffs.values.size(); ++i)
        off = std::max(off, std::abs(coeffs.values[i]));
    CHECK(off < 1e-12);
}

TEST_CASE("dct2/idct2 roundtrip and energy preservation") {
    Rng rng(7);
    Plane p(64, 64);
    for (double& v : p.values) v = rng.next_double();
    const Plane coeffs = dct2(p);
    const Plane back = idct2(coeffs);

    double max_err = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i)
        max_err = std::max(max_err, std::abs(p.values[i] - back.values[i]));
    CHECK(max_err <= 1e-9);

    double ex = 0.0, ec = 0.0;
    for (double v : p.values) ex += v * v;
    for (double v : coeffs.values) ec += v * v;
    CHECK(std::abs(ex - ec) / ex <= 1e-9);
}

TEST_CASE("dct2 rejects multi-channel images") {
    CHECK_THROWS_AS(dct2(synth_image(1, 64, 64, SynthKind::Texture, 3)), std::invalid_argument);
}

TEST_CASE("spectrum of a constant image is a single center peak") {
    const Image img(64, 64, 1, 0.5);
    const Spectrum spec = fourier_log_spectrum(img);
    const int cy = 32, cx = 32;
    CHECK(spec.at(cy, cx) > 1.0);
    double off = 0.0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if (y != cy || x != cx) off = std::max(off, spec.at(y, x));
    CHECK(off <= 1e-9);
}

TEST_CASE("horizontal sinusoid gives two symmetric peaks") {
    const int n = 64, k = 9;
    Image img(n, n, 1);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            img.at(y, x) = 0.5 + 0.4 * std::sin(2.0 * 3.14159265358979323846 * k * x / n);
    const Spectrum spec = fourier_log_spectrum(img);
    const int cy = n / 2, cx = n / 2;

    const double peak = std::max(spec.at(cy, cx - k), spec.at(cy, cx + k));
    CHECK(spec.at(cy, cx - k) == doctest::Approx(spec.at(cy, cx + k)).epsilon(1e-9));
    double off = 0.0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (y == cy && (x == cx || x == cx - k || x == cx + k)) continue;
            off = std::max(off, spec.at(y, x));
        }
    CHECK(off < peak * 0.2);
}

TEST_CASE("white noise spectrum is approximately flat") {
    Rng rng(11);
    Image img(256, 256, 1);
    for (double& v : img.data) v = 0.5 + 0.28 * (rng.next_double() - 0.5) * 2.0;
    const Spectrum spec = fourier_log_spectrum(img);

    // radial means over 12 annuli, DC cell excluded
    double sums[12] = {};
    std::size_t counts[12] = {};
    const int cy = 128, cx = 128;
    for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x) {
            if (y == cy && x == cx) continue;
            const double r = std::hypot((y - cy) / 128.0, (x - cx) / 128.0);
            if (r > 1.0) continue;
            const int bin = std::min(11, static_cast<int>(r * 12.0));
            sums[bin] += spec.at(y, x);
            counts[bin]++;
        }
    double mean = 0.0;
    for (int b = 0; b < 12; ++b) {
        sums[b] /= static_cast<double>(counts[b]);
        mean += sums[b] / 12.0;
    }
    double var = 0.0;
    for (int b = 0; b < 12; ++b) var += (sums[b] - mean) * (sums[b] - mean) / 12.0;
    CHECK(std::sqrt(var) / mean < 0.2);
}

TEST_CASE("spectrum of real input is point-symmetric about the center") {
    for (int h : {64, 96}) {
        const Image img = synth_image(5, h, 128, SynthKind::Shapes, 3);
        const Spectrum spec = fourier_log_spectrum(img);
        const int cy = spec.height / 2, cx = spec.width / 2;
        double worst = 0.0;
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x) {
                const int ys = ((2 * cy - y) % spec.height + spec.height) % spec.height;
                const int xs = ((2 * cx - x) % spec.width + spec.width) % spec.width;
                worst = std::max(worst, std::abs(spec.at(y, x) - spec.at(ys, xs)));
            }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("luminance uses rec601 weights") {
    Image img(1, 1, 3);
    img.data = {1.0, 0.5, 0.25};
    const Plane lum = luminance(img);
    CHECK(lum.values[0] ==
          doctest::Approx(0.299 * 1.0 + 0.587 * 0.5 + 0.114 * 0.25).epsilon(1e-12));
}

TEST_CASE("validate_image rejects bad shapes and ranges") {
    Image img(2, 2, 1, 0.5);
    img.data[3] = 1.5;
    CHECK_THROWS_AS(validate_image(img), std::invalid_argument);
    img.data[3] = 0.5;
    img.data.pop_back();
    CHECK_THROWS_AS(validate_image(img), std::invalid_argument);
    CHECK_THROWS_AS(validate_image(Image(0, 2, 1)), std::invalid_argument);
}
