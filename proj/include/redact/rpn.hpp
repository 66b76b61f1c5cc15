#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "redact/geometry.hpp"

namespace redact::rpn {

struct AnchorGrid {
    std::vector<BBox> anchors;
    int stride = 16;
    std::vector<double> scales;
    std::vector<double> ratios;
    int image_w = 0;
    int image_h = 0;
};

/// Anchors centered on the stride grid, one per (cell, scale, ratio) in
/// row-major cell order with scale varying before ratio. An anchor of scale s
/// and ratio r has area s^2 and aspect w/h = r, so w = s*sqrt(r), h = s/sqrt(r).
/// Anchors may extend past the image border.
inline AnchorGrid generate_anchors(int image_w, int image_h, int stride,
                                   std::vector<double> scales, std::vector<double> ratios) {
    if (image_w <= 0 || image_h <= 0 || stride <= 0)
        throw std::invalid_argument("generate_anchors: dimensions must be positive");
    if (scales.empty() || ratios.empty())
        throw std::invalid_argument("generate_anchors: scales and ratios must be nonempty");

    AnchorGrid grid;
    grid.stride = stride;
    grid.image_w = image_w;
    grid.image_h = image_h;
    const int cols = (image_w + stride - 1) / stride;
    const int rows = (image_h + stride - 1) / stride;
    grid.anchors.reserve(static_cast<std::size_t>(cols) * rows * scales.size() * ratios.size());
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            const double cx = col * stride + stride / 2.0;
            const double cy = row * stride + stride / 2.0;
            for (double s : scales) {
                for (double r : ratios) {
                    const double w = s * std::sqrt(r);
                    const double h = s / std::sqrt(r);
                    grid.anchors.emplace_back(cx - w / 2.0, cy - h / 2.0, w, h);
                }
            }
        }
    }
    grid.scales = std::move(scales);
    grid.ratios = std::move(ratios);
    return grid;
}

enum class AnchorLabel : std::uint8_t { Positive, Negative, Ignore };

/// IoU label assignment: max IoU over ground truth >= pos_iou makes an
/// anchor Positive, <= neg_iou Negative, anything between Ignore. On top of
/// the thresholds, each truth's best-overlapping anchor (if it overlaps at
/// all) is forced Positive so no truth goes unrepresented; ties pick the
/// lowest anchor index.
inline std::vector<AnchorLabel> assign_labels(const AnchorGrid& grid,
                                              const std::vector<BBox>& gts,
                                              double pos_iou = 0.7, double neg_iou = 0.3) {
    if (!(0.0 <= neg_iou && neg_iou < pos_iou && pos_iou <= 1.0))
        throw std::invalid_argument("assign_labels: need 0 <= neg_iou < pos_iou <= 1");

    std::vector<AnchorLabel> labels(grid.anchors.size(), AnchorLabel::Negative);
    std::vector<std::size_t> best_anchor(gts.size());
    std::vector<double> best_iou(gts.size(), 0.0);

    for (std::size_t a = 0; a < grid.anchors.size(); ++a) {
        double max_iou = 0.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double v = iou(grid.anchors[a], gts[g]);
            max_iou = std::max(max_iou, v);
            if (v > best_iou[g]) {
                best_iou[g] = v;
                best_anchor[g] = a;
            }
        }
        if (max_iou >= pos_iou)
            labels[a] = AnchorLabel::Positive;
        else if (max_iou <= neg_iou)
            labels[a] = AnchorLabel::Negative;
        else
            labels[a] = AnchorLabel::Ignore;
    }
    for (std::size_t g = 0; g < gts.size(); ++g)
        if (best_iou[g] > 0.0) labels[best_anchor[g]] = AnchorLabel::Positive;
    return labels;
}

struct Minibatch {
    std::vector<std::size_t> indices;  // sampled anchor indices, positives first
    std::vector<int> p_star;           // 1 for sampled positives, 0 for negatives
};

namespace detail {

/// Partial Fisher-Yates draw of n items, fixed across standard libraries so a
/// seed pins the sample everywhere.
inline std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool,
                                                         std::size_t n, std::mt19937_64& gen) {
    n = std::min(n, pool.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(gen() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace detail

/// Uniformly samples up to n_per_class Positive and n_per_class Negative
/// anchors without replacement; classes short on anchors contribute all they
/// have. Deterministic for a fixed seed.
inline Minibatch sample_minibatch(const std::vector<AnchorLabel>& labels, std::size_t n_per_class,
                                  std::uint64_t seed) {
    if (n_per_class < 1) throw std::invalid_argument("sample_minibatch: n_per_class must be >= 1");
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == AnchorLabel::Positive) positives.push_back(i);
        if (labels[i] == AnchorLabel::Negative) negatives.push_back(i);
    }
    if (positives.empty() && negatives.empty())
        throw std::invalid_argument("sample_minibatch: no positive or negative anchors");

    std::mt19937_64 gen(seed);
    Minibatch mb;
    for (std::size_t i : detail::draw_without_replacement(std::move(positives), n_per_class, gen)) {
        mb.indices.push_back(i);
        mb.p_star.push_back(1);
    }
    for (std::size_t i : detail::draw_without_replacement(std::move(negatives), n_per_class, gen)) {
        mb.indices.push_back(i);
        mb.p_star.push_back(0);
    }
    return mb;
}

using BoxOffsets = std::array<double, 4>;  // (tx, ty, tw, th)

/// Center/log-size box parameterization relative to an anchor:
/// tx = (cx_gt - cx_a)/w_a, ty = (cy_gt - cy_a)/h_a, tw = ln(w_gt/w_a),
/// th = ln(h_gt/h_a).
inline BoxOffsets encode_box(const BBox& anchor, const BBox& gt) {
    if (anchor.w <= 0.0 || anchor.h <= 0.0)
        throw std::invalid_argument("encode_box: anchor must have positive area");
    if (gt.w <= 0.0 || gt.h <= 0.0)
        throw std::invalid_argument("encode_box: ground-truth box must have positive area");
    const double cxa = anchor.x + anchor.w / 2.0;
    const double cya = anchor.y + anchor.h / 2.0;
    const double cxg = gt.x + gt.w / 2.0;
    const double cyg = gt.y + gt.h / 2.0;
    return {(cxg - cxa) / anchor.w, (cyg - cya) / anchor.h, std::log(gt.w / anchor.w),
            std::log(gt.h / anchor.h)};
}

inline BBox decode_box(const BBox& anchor, const BoxOffsets& t) {
    if (anchor.w <= 0.0 || anchor.h <= 0.0)
        throw std::invalid_argument("decode_box: anchor must have positive area");
    const double cx = anchor.x + anchor.w / 2.0 + t[0] * anchor.w;
    const double cy = anchor.y + anchor.h / 2.0 + t[1] * anchor.h;
    const double w = anchor.w * std::exp(t[2]);
    const double h = anchor.h * std::exp(t[3]);
    return {cx - w / 2.0, cy - h / 2.0, w, h};
}

/// Piecewise regression loss: 0.5 x^2 inside |x| < 1, |x| - 0.5 outside.
/// Continuous at the breakpoint where both branches give 0.5.
inline double smooth_l1(double x) {
    const double a = std::abs(x);
    if (a < 1.0) return 0.5 * x * x;
    return a - 0.5;
}

inline double smooth_l1_sum(const BoxOffsets& t, const BoxOffsets& t_star) {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) sum += smooth_l1(t[i] - t_star[i]);
    return sum;
}

/// Negative log likelihood of the true class under a two-class distribution
/// (background, face). A zero probability on the true class yields +infinity.
inline double cls_loss(std::span<const double, 2> p, int label) {
    if (label != 0 && label != 1) throw std::invalid_argument("cls_loss: label must be 0 or 1");
    if (p[0] < 0.0 || p[1] < 0.0)
        throw std::invalid_argument("cls_loss: probabilities must be nonnegative");
    if (std::abs(p[0] + p[1] - 1.0) > 1e-9)
        throw std::invalid_argument("cls_loss: probabilities must sum to 1");
    const double py = p[static_cast<std::size_t>(label)];
    if (py == 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(py);
}

inline double cls_loss(const std::array<double, 2>& p, int label) {
    return cls_loss(std::span<const double, 2>(p), label);
}

/// Raw-logit form: applies a numerically stable softmax first.
inline double cls_loss_logits(const std::array<double, 2>& z, int label) {
    if (label != 0 && label != 1)
        throw std::invalid_argument("cls_loss_logits: label must be 0 or 1");
    const double m = std::max(z[0], z[1]);
    const double lse = m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m));
    return lse - z[static_cast<std::size_t>(label)];
}

/// One verification batch: per-anchor labels and foreground probabilities,
/// the sampled minibatch, and encoded box offsets read only at positive
/// anchors. The normalizers are explicit so either published batch-size
/// convention can be reproduced.
struct RpnBatch {
    std::vector<AnchorLabel> labels;
    std::vector<double> foreground_prob;
    std::vector<std::size_t> sampled;
    std::vector<BoxOffsets> pred_offsets;
    std::vector<BoxOffsets> target_offsets;
    std::size_t n_cls = 0;
    std::size_t n_reg = 0;
    double lambda = 10.0;
};

struct RpnLoss {
    double total = 0.0;
    double cls_term = 0.0;
    double reg_term = 0.0;
};

/// Two-part objective: mean classification loss over the sampled anchors
/// plus lambda-weighted mean regression loss over the sampled anchors whose
/// label is Positive. The regression term is gated entirely off when no
/// sampled anchor is positive.
inline RpnLoss rpn_loss(const RpnBatch& batch) {
    if (batch.n_cls == 0) throw std::invalid_argument("rpn_loss: n_cls must be > 0");
    if (batch.n_reg == 0) throw std::invalid_argument("rpn_loss: n_reg must be > 0");

    RpnLoss loss;
    for (std::size_t i : batch.sampled) {
        const bool positive = batch.labels[i] == AnchorLabel::Positive;
        const double pf = batch.foreground_prob[i];
        loss.cls_term += cls_loss(std::array<double, 2>{1.0 - pf, pf}, positive ? 1 : 0);
        if (positive)
            loss.reg_term += smooth_l1_sum(batch.pred_offsets[i], batch.target_offsets[i]);
    }
    loss.cls_term /= static_cast<double>(batch.n_cls);
    loss.reg_term *= batch.lambda / static_cast<double>(batch.n_reg);
    loss.total = loss.cls_term + loss.reg_term;
    return loss;
}

/// Greedy non-maximum suppression. The top pre_top boxes by score enter
/// (score ties keep the earlier box first); the highest-scored survivor is
/// accepted and everything overlapping it with IoU strictly above iou_thresh
/// is suppressed, repeating until done; output is truncated to post_top and
/// sorted by descending score. All boxes must carry scores.
inline std::vector<BBox> nms(const std::vector<BBox>& boxes, double iou_thresh,
                             std::size_t pre_top = 12000, std::size_t post_top = 2000) {
    if (iou_thresh <= 0.0 || iou_thresh > 1.0)
        throw std::invalid_argument("nms: iou_thresh must be in (0,1]");
    for (const BBox& b : boxes)
        if (!b.score) throw std::invalid_argument("nms: every box must be scored");

    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *boxes[a].score > *boxes[b].score;
    });
    if (order.size() > pre_top) order.resize(pre_top);

    std::vector<BBox> kept;
    std::vector<bool> suppressed(order.size(), false);
    for (std::size_t i = 0; i < order.size() && kept.size() < post_top; ++i) {
        if (suppressed[i]) continue;
        const BBox& winner = boxes[order[i]];
        kept.push_back(winner);
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (!suppressed[j] && iou(winner, boxes[order[j]]) > iou_thresh)
                suppressed[j] = true;
        }
    }
    return kept;
}

}  // namespace redact::rpn
