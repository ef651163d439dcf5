#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "wrd/image.hpp"

namespace wrd {

namespace {

constexpr double kInv255 = 1.0 / 255.0;

std::uint8_t quantize_byte(double v) {
    // round-half-up, v already in [0,1]
    const double scaled = std::floor(v * 255.0 + 0.5);
    return static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, scaled)));
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                      [](char a, char b) { return std::tolower(a) == std::tolower(b); });
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp) {
    std::longjmp(*static_cast<std::jmp_buf*>(png_get_error_ptr(png)), 1);
}
void png_warn_fn(png_structp, png_const_charp) {}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("unreadable file: " + path);

    std::jmp_buf jmp;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &jmp, png_error_fn, png_warn_fn);
    if (!png) throw std::runtime_error("unreadable file: " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("unreadable file: " + path);
    }

    std::vector<png_bytep> rows;
    std::vector<png_byte> pixels;
    int h = 0, w = 0, ch = 0;

    if (setjmp(jmp)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("unreadable file: " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (width == 0 || height == 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("zero-dimension image: " + path);
    }

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
    png_read_update_info(png, info);

    h = static_cast<int>(height);
    w = static_cast<int>(width);
    ch = static_cast<int>(png_get_channels(png, info));
    if (ch == 2) ch = 1;  // paranoid; alpha already stripped
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("unsupported format: " + path);
    }

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    pixels.assign(rowbytes * h, 0);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + rowbytes * y;

    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(h, w, ch);
    for (int y = 0; y < h; ++y) {
        const png_bytep row = pixels.data() + rowbytes * y;
        for (int x = 0; x < w * ch; ++x)
            img.data[(static_cast<std::size_t>(y) * w * ch) + x] = row[x] * kInv255;
    }
    return img;
}

void save_png(const Image& img, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("unwritable path: " + path);

    std::jmp_buf jmp;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &jmp, png_error_fn, png_warn_fn);
    if (!png) throw std::runtime_error("unwritable path: " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("unwritable path: " + path);
    }

    std::vector<png_byte> rowbuf(static_cast<std::size_t>(img.width) * img.channels);

    if (setjmp(jmp)) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("unwritable path: " + path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width * img.channels; ++x)
            rowbuf[x] = quantize_byte(img.data[static_cast<std::size_t>(y) * img.width * img.channels + x]);
        png_write_row(png, rowbuf.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

int read_pnm_token(std::istream& in, const std::string& path) {
    // skips whitespace and '#' comment lines
    while (true) {
        int c = in.peek();
        if (c == EOF) throw std::runtime_error("unreadable file: " + path);
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value)) throw std::runtime_error("unreadable file: " + path);
    return value;
}

Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    char m0 = 0, m1 = 0;
    in.get(m0).get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw std::runtime_error("unsupported format: " + path);
    const int channels = (m1 == '6') ? 3 : 1;
    const int w = read_pnm_token(in, path);
    const int h = read_pnm_token(in, path);
    const int maxval = read_pnm_token(in, path);
    if (w <= 0 || h <= 0) throw std::runtime_error("zero-dimension image: " + path);
    if (maxval <= 0 || maxval > 255) throw std::runtime_error("unsupported format: " + path);
    in.get();  // single whitespace before raster

    const std::size_t count = static_cast<std::size_t>(w) * h * channels;
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw std::runtime_error("unreadable file: " + path);

    Image img(h, w, channels);
    const double scale = 1.0 / maxval;
    for (std::size_t i = 0; i < count; ++i) img.data[i] = raw[i] * scale;
    return img;
}

void save_pnm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("unwritable path: " + path);
    out << (img.channels == 3 ? "P6" : "P5") << "\n"
        << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) raw[i] = quantize_byte(img.data[i]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error("unwritable path: " + path);
}

bool sniff_png(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    // Anything that starts like PNG goes to the PNG loader, so a truncated
    // signature reports "unreadable file" rather than "unsupported format".
    return in.gcount() >= 1 && sig[0] == 0x89;
}

}  // namespace

Image load_image(const std::string& path) {
    Image img = sniff_png(path) ? load_png(path) : load_pnm(path);
    validate_image(img);
    return img;
}

void save_image(const Image& img, const std::string& path) {
    validate_image(img);
    if (has_suffix(path, ".png")) {
        save_png(img, path);
    } else {
        save_pnm(img, path);
    }
}

}  // namespace wrd
