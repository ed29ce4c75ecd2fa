// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_IO_HPP
#define MATFIT_IO_HPP

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "matfit/image.hpp"

namespace matfit {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// PFM (portable float map), little-endian, rows bottom-to-top.

namespace detail {

inline void pfm_write_header(std::FILE* f, const char* magic, int w, int h) {
    std::fprintf(f, "%s\n%d %d\n-1.0\n", magic, w, h);
}

inline std::string pfm_token(std::FILE* f) {
    std::string t;
    int c;
    while ((c = std::fgetc(f)) != EOF && std::isspace(c)) {}
    if (c == EOF) throw IoError("pfm: truncated header");
    t.push_back(char(c));
    while ((c = std::fgetc(f)) != EOF && !std::isspace(c)) t.push_back(char(c));
    return t;
}

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace detail

inline void write_pfm(const std::string& path, const ImageRGB& img) {
    detail::FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("pfm: cannot open for write: " + path);
    detail::pfm_write_header(f.get(), "PF", img.width, img.height);
    for (int y = img.height - 1; y >= 0; --y) {
        const float* row = &img.data[img.idx(0, y)];
        if (std::fwrite(row, sizeof(float), size_t(img.width) * 3, f.get()) != size_t(img.width) * 3)
            throw IoError("pfm: short write: " + path);
    }
}

inline ImageRGB read_pfm(const std::string& path) {
    detail::FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("pfm: cannot open: " + path);
    std::string magic = detail::pfm_token(f.get());
    bool color = magic == "PF";
    if (!color && magic != "Pf") throw IoError("pfm: bad magic in " + path);
    int w = std::stoi(detail::pfm_token(f.get()));
    int h = std::stoi(detail::pfm_token(f.get()));
    double scale = std::stod(detail::pfm_token(f.get()));
    if (w <= 0 || h <= 0) throw IoError("pfm: bad dimensions in " + path);
    if (scale >= 0) throw IoError("pfm: big-endian files unsupported: " + path);
    ImageRGB img(w, h);
    int nc = color ? 3 : 1;
    std::vector<float> row(size_t(w) * nc);
    for (int y = h - 1; y >= 0; --y) {
        if (std::fread(row.data(), sizeof(float), row.size(), f.get()) != row.size())
            throw IoError("pfm: truncated data in " + path);
        for (int x = 0; x < w; ++x) {
            if (color)
                img.set(x, y, RGB(row[x * 3], row[x * 3 + 1], row[x * 3 + 2]));
            else
                img.set(x, y, RGB(row[x]));
        }
    }
    return img;
}

// Single-channel PFM ("Pf"); used for scalar fields.
inline void write_pfm_gray(const std::string& path, int w, int h, const std::vector<float>& v) {
    if (v.size() != size_t(w) * h) throw IoError("pfm: size mismatch");
    detail::FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("pfm: cannot open for write: " + path);
    detail::pfm_write_header(f.get(), "Pf", w, h);
    for (int y = h - 1; y >= 0; --y)
        if (std::fwrite(&v[size_t(y) * w], sizeof(float), size_t(w), f.get()) != size_t(w))
            throw IoError("pfm: short write: " + path);
}

// ---------------------------------------------------------------------------
// PNG. 8-bit RGB previews use fixed gamma 2.2 and are never read back into
// math paths. Masks are 1-bit grayscale.

namespace detail {

struct PngWriter {
    std::FILE* f = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;

    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (f) std::fclose(f);
    }
};

struct PngReader {
    std::FILE* f = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;

    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (f) std::fclose(f);
    }
};

} // namespace detail

inline void write_png_preview(const std::string& path, const ImageRGB& img, double exposure = 1.0) {
    detail::PngWriter w;
    w.f = std::fopen(path.c_str(), "wb");
    if (!w.f) throw IoError("png: cannot open for write: " + path);
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (setjmp(png_jmpbuf(w.png))) throw IoError("png: write failed: " + path);
    png_init_io(w.png, w.f);
    png_set_IHDR(w.png, w.info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    std::vector<png_byte> row(size_t(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            RGB c = img.at(x, y) * exposure;
            for (int ch = 0; ch < 3; ++ch) {
                double v = std::pow(clamp01(c[ch]), 1.0 / 2.2);
                row[x * 3 + ch] = png_byte(std::lround(v * 255.0));
            }
        }
        png_write_row(w.png, row.data());
    }
    png_write_end(w.png, nullptr);
}

inline void write_png_mask(const std::string& path, const Mask& mask) {
    detail::PngWriter w;
    w.f = std::fopen(path.c_str(), "wb");
    if (!w.f) throw IoError("png: cannot open for write: " + path);
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (setjmp(png_jmpbuf(w.png))) throw IoError("png: write failed: " + path);
    png_init_io(w.png, w.f);
    png_set_IHDR(w.png, w.info, mask.width, mask.height, 1, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    size_t rowbytes = (size_t(mask.width) + 7) / 8;
    std::vector<png_byte> row(rowbytes);
    for (int y = 0; y < mask.height; ++y) {
        std::fill(row.begin(), row.end(), 0);
        for (int x = 0; x < mask.width; ++x)
            if (mask.get(x, y)) row[x / 8] |= png_byte(0x80 >> (x % 8));
        png_write_row(w.png, row.data());
    }
    png_write_end(w.png, nullptr);
}

inline Mask read_png_mask(const std::string& path) {
    detail::PngReader r;
    r.f = std::fopen(path.c_str(), "rb");
    if (!r.f) throw IoError("png: cannot open: " + path);
    png_byte sig[8];
    if (std::fread(sig, 1, 8, r.f) != 8 || png_sig_cmp(sig, 0, 8))
        throw IoError("png: not a png file: " + path);
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = png_create_info_struct(r.png);
    if (setjmp(png_jmpbuf(r.png))) throw IoError("png: read failed: " + path);
    png_init_io(r.png, r.f);
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);
    // normalize anything to 8-bit gray
    png_set_expand(r.png);
    if (png_get_bit_depth(r.png, r.info) == 16) png_set_strip_16(r.png);
    png_byte color = png_get_color_type(r.png, r.info);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
    png_read_update_info(r.png, r.info);
    int w = int(png_get_image_width(r.png, r.info));
    int h = int(png_get_image_height(r.png, r.info));
    Mask m(w, h);
    std::vector<png_byte> row(png_get_rowbytes(r.png, r.info));
    for (int y = 0; y < h; ++y) {
        png_read_row(r.png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) m.set(x, y, row[x] >= 128);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Small text-file helpers shared by the serialization code.

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::string> lines;
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
    return lines;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    out << content;
    if (!out) throw IoError("short write: " + path);
}

} // namespace matfit

#endif
