#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "redact/association.hpp"
#include "redact/geometry.hpp"
#include "redact/streams.hpp"

namespace redact {

struct SmootherConfig {
    int k = 3;                      // odd kernel size >= 3; half-window is (k-1)/2
    double link_iou = 0.3;          // forwarded to track association
    bool require_bilateral = true;  // demand support on both sides of the gap

    [[nodiscard]] int half_window() const { return (k - 1) / 2; }

    void validate() const {
        if (k < 3 || k % 2 == 0)
            throw std::invalid_argument("smoother: k must be an odd integer >= 3");
        if (link_iou <= 0.0 || link_iou > 1.0)
            throw std::invalid_argument("smoother: link_iou must be in (0,1]");
    }
};

/// A box synthesized for one track at one frame.
struct GapFill {
    int track_id = 0;
    int frame = 0;
    BBox box;
};

/// Sliding-average gap filling on one track. For every frame between the
/// track's first and last entry where the track has no box, the track's
/// detected boxes at frames within +-half_window are averaged and the mean
/// inserted. With require_bilateral, at least one contributing box must lie
/// before the frame and one after; this keeps the filler from extrapolating
/// past the track's real extent. Boxes synthesized here never feed later
/// averages: the pass is single shot over the detected entries only.
inline std::vector<GapFill> fill_gaps(const Track& track, int k, bool require_bilateral) {
    std::vector<GapFill> fills;
    if (track.entries.size() < 2) return fills;
    const int h = (k - 1) / 2;

    std::size_t cursor = 0;  // first entry with frame >= window start
    for (int t = track.first_frame(); t <= track.last_frame(); ++t) {
        while (cursor < track.entries.size() && track.entries[cursor].frame < t - h) ++cursor;
        if (track.at(t) != nullptr) continue;

        std::vector<BBox> window;
        bool before = false;
        bool after = false;
        for (std::size_t i = cursor; i < track.entries.size() && track.entries[i].frame <= t + h;
             ++i) {
            const TrackEntry& e = track.entries[i];
            if (e.prov != Provenance::Detected) continue;
            window.push_back(e.box);
            before = before || e.frame < t;
            after = after || e.frame > t;
        }
        if (window.empty()) continue;
        if (require_bilateral && !(before && after)) continue;

        BBox filled = average_boxes(window);
        filled.synth = true;
        fills.push_back({track.id, t, filled});
    }
    return fills;
}

/// The sliding-average kernel over a whole stream: associates boxes into
/// tracks (max_gap = k-1, so association survives exactly the gaps the
/// kernel can reach across), fills each track's gaps, and merges the
/// synthesized boxes back in. Every input box passes through bit-identical;
/// synthesized boxes are appended to their frame in track-id order and carry
/// score = mean of the contributing scores.
inline DetectionStream smooth(const DetectionStream& s, const SmootherConfig& cfg) {
    cfg.validate();
    const std::vector<Track> tracks = build_tracks(s, cfg.link_iou, cfg.k - 1);

    std::map<int, std::vector<BBox>> inserts;  // frame -> synthesized boxes
    for (const Track& track : tracks)
        for (GapFill& fill : fill_gaps(track, cfg.k, cfg.require_bilateral))
            inserts[fill.frame].push_back(fill.box);

    DetectionStream out;
    out.frame_count = s.frame_count;
    auto rec_it = s.records.begin();
    auto ins_it = inserts.begin();
    while (rec_it != s.records.end() || ins_it != inserts.end()) {
        if (ins_it == inserts.end() ||
            (rec_it != s.records.end() && rec_it->frame < ins_it->first)) {
            out.records.push_back(*rec_it);
            ++rec_it;
        } else if (rec_it == s.records.end() || ins_it->first < rec_it->frame) {
            out.records.push_back({ins_it->first, ins_it->second});
            ++ins_it;
        } else {
            FrameRecord merged = *rec_it;
            merged.boxes.insert(merged.boxes.end(), ins_it->second.begin(),
                                ins_it->second.end());
            out.records.push_back(std::move(merged));
            ++rec_it;
            ++ins_it;
        }
    }
    return out;
}

/// Removes every synthesized box; undoes exactly what smooth() added.
inline DetectionStream strip_synthesized(const DetectionStream& s) {
    DetectionStream out;
    out.frame_count = s.frame_count;
    for (const FrameRecord& r : s.records) {
        FrameRecord kept;
        kept.frame = r.frame;
        for (const BBox& b : r.boxes)
            if (!b.synth) kept.boxes.push_back(b);
        if (!kept.boxes.empty()) out.records.push_back(std::move(kept));
    }
    return out;
}

}  // namespace redact
