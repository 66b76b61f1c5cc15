#pragma once

#include <cstdio>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "redact/association.hpp"
#include "redact/streams.hpp"

namespace redact {

/// TP/FP/FN tallies under the four-case activation rule. A matched pair at
/// or above the IoU threshold is a true positive; a pair below it counts as
/// both a false positive and a false negative; an unmatched detection is a
/// false positive; an unmatched truth a false negative.
struct ActivationCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;

    bool operator==(const ActivationCounts&) const = default;
};

/// Per-case tallies, mostly for auditing the decomposition
/// tp + below_threshold_pairs + lone_truths == total ground-truth boxes and
/// fp == lone_detections + below_threshold_pairs.
struct CaseTally {
    long matched = 0;          // case 1: pair with iou >= t
    long lone_truths = 0;      // case 2: truth with no overlapping detection
    long lone_detections = 0;  // case 3: detection with no overlapping truth
    long below_threshold = 0;  // case 4: pair with iou < t, double-counted

    [[nodiscard]] ActivationCounts counts() const {
        return {matched, lone_detections + below_threshold, lone_truths + below_threshold};
    }
};

struct PrfReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double threshold = 0.0;
};

inline void check_threshold(double t) {
    if (t <= 0.0 || t > 1.0)
        throw std::invalid_argument("iou threshold must be in (0,1]");
}

/// Applies a threshold to an existing frame matching.
inline CaseTally tally_matching(const FrameMatching& m, double t) {
    CaseTally c;
    for (const MatchPair& p : m.pairs) {
        if (p.iou >= t)
            ++c.matched;
        else
            ++c.below_threshold;
    }
    c.lone_detections = static_cast<long>(m.unmatched_detections.size());
    c.lone_truths = static_cast<long>(m.unmatched_truths.size());
    return c;
}

namespace detail {

/// Frames that have a record in either stream; all others hold no boxes on
/// both sides and contribute nothing to any count.
inline std::vector<int> active_frames(const DetectionStream& a, const DetectionStream& b) {
    std::set<int> frames;
    for (const auto& r : a.records) frames.insert(r.frame);
    for (const auto& r : b.records) frames.insert(r.frame);
    return {frames.begin(), frames.end()};
}

inline std::vector<BBox> boxes_vec(const DetectionStream& s, int frame) {
    auto span = s.boxes_at(frame);
    return {span.begin(), span.end()};
}

}  // namespace detail

inline CaseTally tally_activations(const DetectionStream& dets, const DetectionStream& gts,
                                   double t) {
    check_threshold(t);
    CaseTally total;
    for (int frame : detail::active_frames(dets, gts)) {
        const FrameMatching m =
            match_frame(detail::boxes_vec(dets, frame), detail::boxes_vec(gts, frame));
        const CaseTally c = tally_matching(m, t);
        total.matched += c.matched;
        total.lone_truths += c.lone_truths;
        total.lone_detections += c.lone_detections;
        total.below_threshold += c.below_threshold;
    }
    return total;
}

inline ActivationCounts count_activations(const DetectionStream& dets,
                                          const DetectionStream& gts, double t) {
    return tally_activations(dets, gts, t).counts();
}

/// Harmonic mean of precision and recall; 0 when both are 0.
inline double f1_score(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

/// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 their harmonic mean;
/// each 0 when its denominator is 0.
inline PrfReport prf(const ActivationCounts& c, double t) {
    PrfReport r;
    r.threshold = t;
    const double dp = static_cast<double>(c.tp + c.fp);
    const double dr = static_cast<double>(c.tp + c.fn);
    r.precision = dp > 0.0 ? static_cast<double>(c.tp) / dp : 0.0;
    r.recall = dr > 0.0 ? static_cast<double>(c.tp) / dr : 0.0;
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

struct SweepRow {
    ActivationCounts counts;
    PrfReport report;
};

/// Threshold sweep over one fixed matching: match_frame runs once per frame,
/// then every threshold is applied to the stored pairings. With the matching
/// fixed, tp is non-increasing in t while fp and fn are non-decreasing, so
/// precision and recall fall monotonically.
inline std::vector<SweepRow> sweep(const DetectionStream& dets, const DetectionStream& gts,
                                   const std::vector<double>& thresholds) {
    for (double t : thresholds) check_threshold(t);

    std::vector<FrameMatching> matchings;
    for (int frame : detail::active_frames(dets, gts))
        matchings.push_back(
            match_frame(detail::boxes_vec(dets, frame), detail::boxes_vec(gts, frame)));

    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds) {
        CaseTally total;
        for (const FrameMatching& m : matchings) {
            const CaseTally c = tally_matching(m, t);
            total.matched += c.matched;
            total.lone_truths += c.lone_truths;
            total.lone_detections += c.lone_detections;
            total.below_threshold += c.below_threshold;
        }
        const ActivationCounts counts = total.counts();
        rows.push_back({counts, prf(counts, t)});
    }
    return rows;
}

/// CSV rendering of a sweep: header plus one row per threshold, reals at a
/// fixed six decimals.
inline std::string emit_report(const std::vector<SweepRow>& rows) {
    std::string out = "threshold,tp,fp,fn,precision,recall,f1\n";
    char buf[160];
    for (const SweepRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f,%ld,%ld,%ld,%.6f,%.6f,%.6f\n",
                      row.report.threshold, row.counts.tp, row.counts.fp, row.counts.fn,
                      row.report.precision, row.report.recall, row.report.f1);
        out += buf;
    }
    return out;
}

}  // namespace redact
