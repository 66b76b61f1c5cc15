#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "redact/rpn.hpp"

namespace redact::selftest {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-12);
}

// Quadratic reference suppression, kept deliberately independent of the
// greedy implementation it cross-checks.
inline std::vector<BBox> nms_reference(std::vector<BBox> boxes, double thresh,
                                       std::size_t pre_top, std::size_t post_top) {
    std::vector<std::size_t> order(boxes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *boxes[a].score > *boxes[b].score;
    });
    if (order.size() > pre_top) order.resize(pre_top);
    std::vector<BBox> kept;
    for (std::size_t i : order) {
        bool alive = true;
        for (const BBox& k : kept)
            if (iou(k, boxes[i]) > thresh) {
                alive = false;
                break;
            }
        if (alive) kept.push_back(boxes[i]);
        if (kept.size() == post_top) break;
    }
    return kept;
}

}  // namespace detail

/// Central-difference check of the piecewise regression loss derivative at
/// random points, skipping the kink neighborhood at |x| = 1.
inline CheckResult check_smooth_l1_gradient(int n_points = 200, double h = 1e-6,
                                            double tol = 1e-4) {
    std::mt19937_64 gen(7);
    double worst = 0.0;
    int tested = 0;
    while (tested < n_points) {
        const double x = -3.0 + 6.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
        if (std::abs(std::abs(x) - 1.0) < 1e-4) continue;
        ++tested;
        const double fd = (rpn::smooth_l1(x + h) - rpn::smooth_l1(x - h)) / (2.0 * h);
        const double analytic = std::abs(x) < 1.0 ? x : (x > 0.0 ? 1.0 : -1.0);
        worst = std::max(worst, detail::rel_err(fd, analytic));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max rel err %.3e over %d points", worst, tested);
    return {"smooth_l1 gradient vs finite differences", worst <= tol, buf};
}

/// Same check for the softmax log loss with respect to raw logits.
inline CheckResult check_cls_loss_gradient(int n_points = 200, double h = 1e-6,
                                           double tol = 1e-4) {
    std::mt19937_64 gen(11);
    auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    double worst = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const std::array<double, 2> z = {-3.0 + 6.0 * unit(), -3.0 + 6.0 * unit()};
        const int label = gen() % 2 ? 1 : 0;
        const double e0 = std::exp(z[0]);
        const double e1 = std::exp(z[1]);
        const std::array<double, 2> softmax = {e0 / (e0 + e1), e1 / (e0 + e1)};
        for (int j = 0; j < 2; ++j) {
            std::array<double, 2> zp = z;
            std::array<double, 2> zm = z;
            zp[static_cast<std::size_t>(j)] += h;
            zm[static_cast<std::size_t>(j)] -= h;
            const double fd =
                (rpn::cls_loss_logits(zp, label) - rpn::cls_loss_logits(zm, label)) / (2.0 * h);
            const double analytic = softmax[static_cast<std::size_t>(j)] - (j == label ? 1.0 : 0.0);
            worst = std::max(worst, detail::rel_err(fd, analytic));
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max rel err %.3e over %d points", worst, n_points);
    return {"cls_loss logit gradient vs finite differences", worst <= tol, buf};
}

inline CheckResult check_loss_gating() {
    // Perfect predictions: zero loss exactly.
    rpn::RpnBatch perfect;
    perfect.labels = {rpn::AnchorLabel::Positive, rpn::AnchorLabel::Negative};
    perfect.foreground_prob = {1.0, 0.0};
    perfect.sampled = {0, 1};
    perfect.pred_offsets = {{0.1, -0.2, 0.3, 0.0}, {}};
    perfect.target_offsets = {{0.1, -0.2, 0.3, 0.0}, {}};
    perfect.n_cls = 2;
    perfect.n_reg = 2;
    const rpn::RpnLoss zero = rpn::rpn_loss(perfect);

    // No positive anchors: the regression term must vanish no matter what
    // offsets sit in the arrays.
    rpn::RpnBatch negatives_only = perfect;
    negatives_only.labels = {rpn::AnchorLabel::Negative, rpn::AnchorLabel::Negative};
    negatives_only.foreground_prob = {0.25, 0.5};
    negatives_only.pred_offsets = {{5.0, 5.0, 5.0, 5.0}, {5.0, 5.0, 5.0, 5.0}};
    negatives_only.target_offsets = {{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}};
    const rpn::RpnLoss gated = rpn::rpn_loss(negatives_only);

    const bool ok = zero.total == 0.0 && gated.reg_term == 0.0 && gated.cls_term > 0.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "perfect total %.3e, gated reg %.3e", zero.total,
                  gated.reg_term);
    return {"rpn_loss zero point and p* gating", ok, buf};
}

inline CheckResult check_encode_decode(int n_pairs = 500, double tol = 1e-12) {
    std::mt19937_64 gen(13);
    auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    double worst = 0.0;
    for (int i = 0; i < n_pairs; ++i) {
        const BBox anchor(unit() * 500.0, unit() * 500.0, 1.0 + unit() * 200.0,
                          1.0 + unit() * 200.0);
        const BBox gt(unit() * 500.0, unit() * 500.0, 1.0 + unit() * 200.0,
                      1.0 + unit() * 200.0);
        const BBox back = rpn::decode_box(anchor, rpn::encode_box(anchor, gt));
        worst = std::max({worst, std::abs(back.x - gt.x), std::abs(back.y - gt.y),
                          std::abs(back.w - gt.w), std::abs(back.h - gt.h)});
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max coordinate error %.3e over %d pairs", worst, n_pairs);
    return {"encode/decode round trip", worst <= tol, buf};
}

inline CheckResult check_nms_against_reference(int n_instances = 20, std::size_t max_boxes = 500) {
    std::mt19937_64 gen(17);
    auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < n_instances; ++i) {
        const std::size_t n = 1 + static_cast<std::size_t>(unit() * double(max_boxes));
        std::vector<BBox> boxes;
        boxes.reserve(n);
        for (std::size_t b = 0; b < n; ++b) {
            BBox box(unit() * 600.0, unit() * 400.0, 5.0 + unit() * 120.0, 5.0 + unit() * 120.0);
            box.score = unit();
            boxes.push_back(box);
        }
        const auto got = rpn::nms(boxes, 0.5, 12000, 2000);
        const auto want = detail::nms_reference(boxes, 0.5, 12000, 2000);
        if (got != want) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "mismatch on instance %d (%zu boxes)", i, n);
            return {"greedy nms vs quadratic reference", false, buf};
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d random instances match exactly", n_instances);
    return {"greedy nms vs quadratic reference", true, buf};
}

inline std::vector<CheckResult> run_all() {
    return {check_smooth_l1_gradient(), check_cls_loss_gradient(), check_loss_gating(),
            check_encode_decode(), check_nms_against_reference()};
}

}  // namespace redact::selftest
