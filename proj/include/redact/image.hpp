#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace redact {

/// 8-bit RGB raster, row-major, three bytes per pixel.
struct FrameImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    FrameImage() = default;
    FrameImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {}

    [[nodiscard]] std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * width + x) * 3;
    }
    std::uint8_t* at(int x, int y) { return pixels.data() + offset(x, y); }
    [[nodiscard]] const std::uint8_t* at(int x, int y) const { return pixels.data() + offset(x, y); }

    bool operator==(const FrameImage&) const = default;
};

namespace detail {

// PPM header token reader: skips whitespace and '#' comment lines.
inline int next_ppm_int(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = in.get();
        c = in.get();
    }
    int value = -1;
    while (c != EOF && std::isdigit(c)) {
        if (value < 0) value = 0;
        value = value * 10 + (c - '0');
        c = in.get();
    }
    if (value < 0) throw std::runtime_error(path + ": malformed PPM header");
    return value;
}

}  // namespace detail

/// Reads a binary portable pixmap (P6, maxval 255).
inline FrameImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    char magic[2] = {};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '6')
        throw std::runtime_error(path.string() + ": not a P6 pixmap");
    const int w = detail::next_ppm_int(in, path.string());
    const int h = detail::next_ppm_int(in, path.string());
    const int maxval = detail::next_ppm_int(in, path.string());
    if (w <= 0 || h <= 0) throw std::runtime_error(path.string() + ": bad dimensions");
    if (maxval != 255) throw std::runtime_error(path.string() + ": only maxval 255 supported");

    FrameImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error(path.string() + ": truncated pixel data");
    return img;
}

/// Writes the canonical P6 form: "P6\n<w> <h>\n255\n" followed by raw RGB.
inline void write_ppm(const std::filesystem::path& path, const FrameImage& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace redact
