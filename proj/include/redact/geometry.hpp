#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace redact {

/// Axis-aligned box in pixel units, origin top-left, y growing downward.
/// Covers the half-open region [x, x+w) x [y, y+h). Coordinates are real
/// valued; rasterization happens only when pixels are touched.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    std::optional<double> score;  // absent for ground truth
    bool synth = false;           // true when inserted by the smoother

    BBox() = default;
    BBox(double x_, double y_, double w_, double h_) : x(x_), y(y_), w(w_), h(h_) {}
    BBox(double x_, double y_, double w_, double h_, double score_)
        : x(x_), y(y_), w(w_), h(h_), score(score_) {}

    [[nodiscard]] double area() const { return std::max(w, 0.0) * std::max(h, 0.0); }
    [[nodiscard]] double right() const { return x + w; }
    [[nodiscard]] double bottom() const { return y + h; }

    bool operator==(const BBox& o) const {
        return x == o.x && y == o.y && w == o.w && h == o.h && score == o.score &&
               synth == o.synth;
    }
};

inline double intersection_area(const BBox& a, const BBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

/// Intersection over union. Zero-area boxes are legal input; when the union
/// has zero area the result is defined as 0, so degenerate boxes never match.
inline double iou(const BBox& a, const BBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

/// Per-coordinate arithmetic mean. Score is the mean of the scores that are
/// present, absent when none are. Throws on an empty list.
inline BBox average_boxes(const std::vector<BBox>& boxes) {
    if (boxes.empty()) throw std::invalid_argument("average_boxes: empty box list");
    BBox out;
    double score_sum = 0.0;
    std::size_t score_n = 0;
    for (const BBox& b : boxes) {
        out.x += b.x;
        out.y += b.y;
        out.w += b.w;
        out.h += b.h;
        if (b.score) {
            score_sum += *b.score;
            ++score_n;
        }
    }
    const double n = static_cast<double>(boxes.size());
    out.x /= n;
    out.y /= n;
    out.w /= n;
    out.h /= n;
    if (score_n > 0) out.score = score_sum / static_cast<double>(score_n);
    return out;
}

/// Grows every side by margin_frac of the box's own extent, then clips to
/// [0, frame_w) x [0, frame_h). The result may be zero-area when the box
/// lies fully outside the frame.
inline BBox expand_and_clip(const BBox& b, double margin_frac, int frame_w, int frame_h) {
    BBox out = b;
    out.x = b.x - margin_frac * b.w;
    out.y = b.y - margin_frac * b.h;
    out.w = b.w * (1.0 + 2.0 * margin_frac);
    out.h = b.h * (1.0 + 2.0 * margin_frac);

    const double x0 = std::clamp(out.x, 0.0, static_cast<double>(frame_w));
    const double y0 = std::clamp(out.y, 0.0, static_cast<double>(frame_h));
    const double x1 = std::clamp(out.right(), 0.0, static_cast<double>(frame_w));
    const double y1 = std::clamp(out.bottom(), 0.0, static_cast<double>(frame_h));
    out.x = x0;
    out.y = y0;
    out.w = std::max(0.0, x1 - x0);
    out.h = std::max(0.0, y1 - y0);
    return out;
}

}  // namespace redact
