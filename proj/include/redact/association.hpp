#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "redact/geometry.hpp"
#include "redact/streams.hpp"

namespace redact {

enum class Provenance { Detected, Synthesized };

struct TrackEntry {
    int frame = 0;
    BBox box;
    Provenance prov = Provenance::Detected;
};

/// A tracklet: one associated identity, frame-indexed boxes in strictly
/// increasing frame order, at most one entry per frame.
struct Track {
    int id = 0;
    std::vector<TrackEntry> entries;

    [[nodiscard]] int first_frame() const { return entries.front().frame; }
    [[nodiscard]] int last_frame() const { return entries.back().frame; }
    [[nodiscard]] const TrackEntry* at(int frame) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), frame,
                                   [](const TrackEntry& e, int f) { return e.frame < f; });
        if (it == entries.end() || it->frame != frame) return nullptr;
        return &*it;
    }
};

struct MatchPair {
    std::size_t det = 0;
    std::size_t truth = 0;
    double iou = 0.0;
};

/// One-to-one detection/truth pairing within a frame, threshold-free so a
/// sweep can apply many thresholds to a single matching. Pairs are sorted by
/// descending IoU and every pair overlaps (iou > 0).
struct FrameMatching {
    std::vector<MatchPair> pairs;
    std::vector<std::size_t> unmatched_detections;
    std::vector<std::size_t> unmatched_truths;
};

/// Greedy frame-to-frame linking. Processing frames in order, each detection
/// (in list order) joins the open track whose most recent box, at most
/// max_gap wholly missing frames back, overlaps it best with IoU >= link_iou;
/// ties go to the lower track id. A track accepts one box per frame;
/// detections that find no track open a new one. Every input box lands in
/// exactly one track with provenance Detected.
inline std::vector<Track> build_tracks(const DetectionStream& s, double link_iou, int max_gap) {
    if (link_iou <= 0.0 || link_iou > 1.0)
        throw std::invalid_argument("build_tracks: link_iou must be in (0,1]");
    if (max_gap < 0) throw std::invalid_argument("build_tracks: max_gap must be >= 0");

    std::vector<Track> tracks;
    std::vector<std::size_t> open;  // indices of tracks still within reach
    for (const FrameRecord& rec : s.records) {
        // Frames arrive in ascending order, so a track that has fallen more
        // than max_gap frames behind never reopens.
        std::erase_if(open, [&](std::size_t t) {
            return rec.frame - tracks[t].entries.back().frame - 1 > max_gap;
        });
        std::vector<bool> extended(tracks.size(), false);
        for (const BBox& det : rec.boxes) {
            int best = -1;
            double best_iou = 0.0;
            for (std::size_t t : open) {
                if (extended[t]) continue;
                const TrackEntry& last = tracks[t].entries.back();
                if (last.frame >= rec.frame) continue;
                const double v = iou(det, last.box);
                if (v >= link_iou && v > best_iou) {
                    best = static_cast<int>(t);
                    best_iou = v;
                }
            }
            if (best >= 0) {
                tracks[static_cast<std::size_t>(best)].entries.push_back(
                    {rec.frame, det, Provenance::Detected});
                extended[static_cast<std::size_t>(best)] = true;
            } else {
                Track t;
                t.id = static_cast<int>(tracks.size());
                t.entries.push_back({rec.frame, det, Provenance::Detected});
                tracks.push_back(std::move(t));
                open.push_back(tracks.size() - 1);
                extended.push_back(true);
            }
        }
    }
    return tracks;
}

/// Greedy one-to-one matching over all overlapping (detection, truth) pairs
/// in descending IoU order; ties break on lower detection index, then lower
/// truth index. No threshold is applied here.
inline FrameMatching match_frame(const std::vector<BBox>& detections,
                                 const std::vector<BBox>& truths) {
    FrameMatching m;
    std::vector<MatchPair> candidates;
    for (std::size_t d = 0; d < detections.size(); ++d) {
        for (std::size_t g = 0; g < truths.size(); ++g) {
            const double v = iou(detections[d], truths[g]);
            if (v > 0.0) candidates.push_back({d, g, v});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const MatchPair& a, const MatchPair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.det != b.det) return a.det < b.det;
        return a.truth < b.truth;
    });

    std::vector<bool> det_used(detections.size(), false);
    std::vector<bool> truth_used(truths.size(), false);
    for (const MatchPair& c : candidates) {
        if (det_used[c.det] || truth_used[c.truth]) continue;
        det_used[c.det] = true;
        truth_used[c.truth] = true;
        m.pairs.push_back(c);
    }
    for (std::size_t d = 0; d < detections.size(); ++d)
        if (!det_used[d]) m.unmatched_detections.push_back(d);
    for (std::size_t g = 0; g < truths.size(); ++g)
        if (!truth_used[g]) m.unmatched_truths.push_back(g);
    return m;
}

}  // namespace redact
