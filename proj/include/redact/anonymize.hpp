#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "redact/geometry.hpp"
#include "redact/image.hpp"
#include "redact/streams.hpp"

namespace redact {

struct PixelRegion {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open pixel bounds

    [[nodiscard]] int width() const { return x1 - x0; }
    [[nodiscard]] int height() const { return y1 - y0; }
    [[nodiscard]] bool empty() const { return width() <= 0 || height() <= 0; }
};

/// Rasterizes a real-valued box to the pixel cells it touches: any cell the
/// box overlaps at all is included, so redaction over-covers rather than
/// leaving slivers of face visible at fractional edges.
inline PixelRegion rasterize(const BBox& b, int image_w, int image_h) {
    PixelRegion r;
    if (b.w <= 0.0 || b.h <= 0.0) return r;
    r.x0 = std::clamp(static_cast<int>(std::floor(b.x)), 0, image_w);
    r.y0 = std::clamp(static_cast<int>(std::floor(b.y)), 0, image_h);
    r.x1 = std::clamp(static_cast<int>(std::ceil(b.x + b.w)), 0, image_w);
    r.y1 = std::clamp(static_cast<int>(std::ceil(b.y + b.h)), 0, image_h);
    return r;
}

// Integer mean with half-up rounding; fixed so outputs are bit-identical
// across platforms.
inline std::uint8_t rounded_mean(std::uint64_t sum, std::uint64_t n) {
    return static_cast<std::uint8_t>((sum + n / 2) / n);
}

/// Replaces each block x block cell of the region (aligned to the region's
/// top-left, edge cells smaller) with its per-channel mean. Pixels outside
/// the box are untouched.
inline void pixelate_region(FrameImage& img, const BBox& b, int block) {
    if (block < 2) throw std::invalid_argument("pixelate_region: block must be >= 2");
    const PixelRegion r = rasterize(b, img.width, img.height);
    if (r.empty()) return;

    for (int cy = r.y0; cy < r.y1; cy += block) {
        const int cy1 = std::min(cy + block, r.y1);
        for (int cx = r.x0; cx < r.x1; cx += block) {
            const int cx1 = std::min(cx + block, r.x1);
            const std::uint64_t n = static_cast<std::uint64_t>(cx1 - cx) * (cy1 - cy);
            std::uint64_t sum[3] = {0, 0, 0};
            for (int y = cy; y < cy1; ++y)
                for (int x = cx; x < cx1; ++x) {
                    const std::uint8_t* px = img.at(x, y);
                    sum[0] += px[0];
                    sum[1] += px[1];
                    sum[2] += px[2];
                }
            const std::uint8_t mean[3] = {rounded_mean(sum[0], n), rounded_mean(sum[1], n),
                                          rounded_mean(sum[2], n)};
            for (int y = cy; y < cy1; ++y)
                for (int x = cx; x < cx1; ++x) {
                    std::uint8_t* px = img.at(x, y);
                    px[0] = mean[0];
                    px[1] = mean[1];
                    px[2] = mean[2];
                }
        }
    }
}

/// Box blur confined to the region: each pass replaces every in-region pixel
/// with the rounded mean of its (2*radius+1)^2 window clamped to the region
/// boundary. Pixels outside the region are never read or written, so nothing
/// leaks across the box edge in either direction. Runs in O(region) per pass
/// via prefix sums, independent of radius.
inline void blur_region(FrameImage& img, const BBox& b, int radius, int passes) {
    if (radius < 1) throw std::invalid_argument("blur_region: radius must be >= 1");
    if (passes < 1) throw std::invalid_argument("blur_region: passes must be >= 1");
    const PixelRegion r = rasterize(b, img.width, img.height);
    if (r.empty()) return;
    const int rw = r.width();
    const int rh = r.height();

    // prefix[(y+1)*(rw+1) + (x+1)] = sum over region pixels [0..x] x [0..y]
    std::vector<std::uint64_t> prefix(static_cast<std::size_t>(rw + 1) * (rh + 1));
    std::vector<std::uint8_t> next(static_cast<std::size_t>(rw) * rh);

    for (int pass = 0; pass < passes; ++pass) {
        for (int c = 0; c < 3; ++c) {
            for (int y = 0; y < rh; ++y) {
                std::uint64_t row = 0;
                for (int x = 0; x < rw; ++x) {
                    row += img.at(r.x0 + x, r.y0 + y)[c];
                    prefix[static_cast<std::size_t>(y + 1) * (rw + 1) + (x + 1)] =
                        prefix[static_cast<std::size_t>(y) * (rw + 1) + (x + 1)] + row;
                }
            }
            for (int y = 0; y < rh; ++y) {
                const int wy0 = std::max(0, y - radius);
                const int wy1 = std::min(rh - 1, y + radius);
                for (int x = 0; x < rw; ++x) {
                    const int wx0 = std::max(0, x - radius);
                    const int wx1 = std::min(rw - 1, x + radius);
                    const auto cell = [&](int yy, int xx) {
                        return prefix[static_cast<std::size_t>(yy) * (rw + 1) + xx];
                    };
                    const std::uint64_t sum = cell(wy1 + 1, wx1 + 1) - cell(wy0, wx1 + 1) -
                                              cell(wy1 + 1, wx0) + cell(wy0, wx0);
                    const std::uint64_t n =
                        static_cast<std::uint64_t>(wx1 - wx0 + 1) * (wy1 - wy0 + 1);
                    next[static_cast<std::size_t>(y) * rw + x] = rounded_mean(sum, n);
                }
            }
            for (int y = 0; y < rh; ++y)
                for (int x = 0; x < rw; ++x)
                    img.at(r.x0 + x, r.y0 + y)[c] = next[static_cast<std::size_t>(y) * rw + x];
        }
    }
}

enum class RedactMode { Pixelate, BoxBlur };

struct AnonymizeConfig {
    RedactMode mode = RedactMode::Pixelate;
    int block = 16;             // pixelation cell size
    int radius = 8;             // blur window radius
    int passes = 2;             // blur passes
    double margin_frac = 0.1;   // safety margin around each box before redacting

    void validate() const {
        if (block < 2) throw std::invalid_argument("anonymize: block must be >= 2");
        if (radius < 1) throw std::invalid_argument("anonymize: radius must be >= 1");
        if (passes < 1) throw std::invalid_argument("anonymize: passes must be >= 1");
        if (margin_frac < 0.0) throw std::invalid_argument("anonymize: margin must be >= 0");
    }
};

struct AnonymizeSummary {
    std::size_t frames = 0;
    std::size_t redacted_regions = 0;
    std::vector<std::string> errors;

    [[nodiscard]] std::string to_json() const {
        nlohmann::ordered_json j;
        j["frames"] = frames;
        j["redacted_regions"] = redacted_regions;
        j["errors"] = errors;
        return j.dump();
    }
};

inline void redact_box(FrameImage& img, const BBox& b, const AnonymizeConfig& cfg) {
    const BBox grown = expand_and_clip(b, cfg.margin_frac, img.width, img.height);
    if (cfg.mode == RedactMode::Pixelate)
        pixelate_region(img, grown, cfg.block);
    else
        blur_region(img, grown, cfg.radius, cfg.passes);
}

namespace detail {

inline bool frame_index_of(const std::filesystem::path& p, int& index) {
    const std::string name = p.filename().string();
    if (!name.starts_with("frame_") || !name.ends_with(".ppm")) return false;
    const std::string digits = name.substr(6, name.size() - 10);
    if (digits.empty()) return false;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) return false;
    index = value;
    return true;
}

inline void copy_bytes(const std::filesystem::path& from, const std::filesystem::path& to) {
    std::ifstream in(from, std::ios::binary);
    if (!in) throw std::runtime_error(from.string() + ": cannot open");
    std::ofstream out(to, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(to.string() + ": cannot open for writing");
    out << in.rdbuf();
    if (!out) throw std::runtime_error(to.string() + ": write failed");
}

}  // namespace detail

/// Walks frames_in for frame_NNNNNN.ppm files and writes anonymized copies
/// into frames_out. Frames with detections are decoded, every box expanded
/// by the margin and redacted in ascending box order, then re-encoded;
/// frames without detections are copied byte-for-byte. A frame that fails to
/// read is recorded in the summary and processing continues; an unusable
/// output directory is fatal.
inline AnonymizeSummary anonymize_video(const std::filesystem::path& frames_in,
                                        const DetectionStream& boxes,
                                        const AnonymizeConfig& cfg,
                                        const std::filesystem::path& frames_out) {
    cfg.validate();
    if (!std::filesystem::is_directory(frames_in))
        throw std::runtime_error(frames_in.string() + ": not a directory");
    std::filesystem::create_directories(frames_out);
    if (!std::filesystem::is_directory(frames_out))
        throw std::runtime_error(frames_out.string() + ": cannot create output directory");

    std::map<int, std::filesystem::path> frames;
    for (const auto& entry : std::filesystem::directory_iterator(frames_in)) {
        int index = 0;
        if (entry.is_regular_file() && detail::frame_index_of(entry.path(), index))
            frames[index] = entry.path();
    }

    AnonymizeSummary summary;
    for (const auto& [index, path] : frames) {
        const auto out_path = frames_out / path.filename();
        const auto frame_boxes = boxes.boxes_at(index);
        try {
            if (frame_boxes.empty()) {
                detail::copy_bytes(path, out_path);
            } else {
                FrameImage img = read_ppm(path);
                for (const BBox& b : frame_boxes) redact_box(img, b, cfg);
                write_ppm(out_path, img);
                summary.redacted_regions += frame_boxes.size();
            }
            ++summary.frames;
        } catch (const std::exception& e) {
            summary.errors.emplace_back(e.what());
        }
    }
    return summary;
}

}  // namespace redact
