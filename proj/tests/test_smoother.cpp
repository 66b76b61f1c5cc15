#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "redact/smoother.hpp"
#include "redact/synth.hpp"

using redact::BBox;
using redact::DetectionStream;
using redact::SmootherConfig;
using redact::Track;

namespace {

DetectionStream stream_of(std::vector<redact::FrameRecord> records) {
    DetectionStream s;
    s.records = std::move(records);
    int max_frame = -1;
    for (const auto& r : s.records) max_frame = std::max(max_frame, r.frame);
    s.frame_count = max_frame + 1;
    return s;
}

Track track_at(std::vector<std::pair<int, BBox>> entries) {
    Track t;
    for (auto& [frame, box] : entries)
        t.entries.push_back({frame, box, redact::Provenance::Detected});
    return t;
}

}  // namespace

TEST_CASE("smoother config validation") {
    SmootherConfig cfg;
    for (int k : {4, 2, 0, -1, 1}) {
        cfg.k = k;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    cfg.k = 3;
    CHECK_NOTHROW(cfg.validate());
    cfg.k = 7;
    cfg.link_iou = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("a one-frame hole is filled with the neighbor average") {
    const DetectionStream s = stream_of(
        {{0, {BBox(10, 10, 20, 20, 0.9)}}, {2, {BBox(14, 10, 20, 20, 0.7)}}});
    const DetectionStream out = redact::smooth(s, SmootherConfig{});
    REQUIRE(out.records.size() == 3);
    REQUIRE(out.records[1].frame == 1);
    REQUIRE(out.records[1].boxes.size() == 1);
    const BBox& fill = out.records[1].boxes[0];
    CHECK(fill.x == 12.0);
    CHECK(fill.y == 10.0);
    CHECK(fill.w == 20.0);
    CHECK(fill.h == 20.0);
    CHECK(fill.synth);
    REQUIRE(fill.score.has_value());
    CHECK(*fill.score == Catch::Approx(0.8));
}

TEST_CASE("all original boxes survive smoothing bit-identical") {
    redact::synth::SynthConfig cfg;
    cfg.seed = 5;
    cfg.n_frames = 200;
    cfg.n_tracks = 4;
    cfg.drop_rate = 0.3;
    cfg.fp_rate = 1.0;
    cfg.jitter = 2.0;
    const DetectionStream degraded = redact::synth::generate(cfg).degraded;
    for (int k : {3, 5, 7}) {
        SmootherConfig sc;
        sc.k = k;
        const DetectionStream out = redact::smooth(degraded, sc);
        CHECK(redact::strip_synthesized(out) == degraded);
        CHECK(out.frame_count == degraded.frame_count);
        CHECK(out.box_count() >= degraded.box_count());
    }
}

TEST_CASE("synthesized boxes never extend past a track's ends") {
    // The track spans frames 2..4; nothing may appear at 0..1 or 5..6,
    // whatever the kernel reach.
    const DetectionStream s = stream_of(
        {{2, {BBox(0, 0, 20, 20)}}, {4, {BBox(2, 0, 20, 20)}}});
    SmootherConfig cfg;
    cfg.k = 7;
    cfg.require_bilateral = false;
    const DetectionStream out = redact::smooth(s, cfg);
    std::set<int> synth_frames;
    for (const auto& rec : out.records)
        for (const BBox& b : rec.boxes)
            if (b.synth) synth_frames.insert(rec.frame);
    CHECK(synth_frames == std::set<int>{3});
}

TEST_CASE("bilateral support is required by default") {
    // Track entries at 0, 1, 4: frame 2 sees only the left side with k=3,
    // frame 3 only the right side.
    const Track t = track_at(
        {{0, BBox(0, 0, 20, 20)}, {1, BBox(2, 0, 20, 20)}, {4, BBox(8, 0, 20, 20)}});

    const auto bilateral = redact::fill_gaps(t, 3, true);
    CHECK(bilateral.empty());

    const auto unilateral = redact::fill_gaps(t, 3, false);
    REQUIRE(unilateral.size() == 2);
    CHECK(unilateral[0].frame == 2);
    CHECK(unilateral[0].box.x == 2.0);  // average of {frame 1} alone
    CHECK(unilateral[1].frame == 3);
    CHECK(unilateral[1].box.x == 8.0);  // average of {frame 4} alone

    const auto wide = redact::fill_gaps(t, 5, true);
    REQUIRE(wide.size() == 2);
    CHECK(wide[0].frame == 2);
    CHECK(wide[0].box.x == Catch::Approx((0.0 + 2.0 + 8.0) / 3.0));
    CHECK(wide[1].frame == 3);
    CHECK(wide[1].box.x == Catch::Approx((2.0 + 8.0) / 2.0));
}

TEST_CASE("window averages every in-reach detection") {
    const Track t = track_at({{0, BBox(0, 0, 10, 10)},
                              {1, BBox(6, 0, 10, 10)},
                              {3, BBox(12, 0, 10, 10)},
                              {4, BBox(18, 0, 10, 10)}});
    const auto fills = redact::fill_gaps(t, 5, true);
    REQUIRE(fills.size() == 1);
    CHECK(fills[0].frame == 2);
    CHECK(fills[0].track_id == t.id);
    CHECK(fills[0].box.x == Catch::Approx((0.0 + 6.0 + 12.0 + 18.0) / 4.0));
    CHECK(fills[0].box.synth);
}

TEST_CASE("a wider kernel fills at least the frames a narrow one fills") {
    redact::synth::SynthConfig cfg;
    cfg.seed = 17;
    cfg.n_frames = 300;
    cfg.n_tracks = 3;
    cfg.drop_rate = 0.35;
    cfg.max_consecutive_drops = 4;
    const DetectionStream degraded = redact::synth::generate(cfg).degraded;
    for (const Track& t : redact::build_tracks(degraded, 0.3, 6)) {
        std::set<int> narrow;
        std::set<int> wide;
        for (const auto& f : redact::fill_gaps(t, 3, true)) narrow.insert(f.frame);
        for (const auto& f : redact::fill_gaps(t, 7, true)) wide.insert(f.frame);
        CHECK(std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end()));
    }
}

TEST_CASE("singleton tracks produce no fills") {
    CHECK(redact::fill_gaps(track_at({{3, BBox(0, 0, 5, 5)}}), 7, false).empty());
    CHECK(redact::fill_gaps(Track{}, 3, false).empty());
}

TEST_CASE("deep holes stay empty when the kernel cannot reach support") {
    // Entries at 0 and 5: frames 2 and 3 are out of reach for k=3.
    const Track t = track_at({{0, BBox(0, 0, 20, 20)}, {5, BBox(0, 0, 20, 20)}});
    const auto fills = redact::fill_gaps(t, 3, false);
    REQUIRE(fills.size() == 2);
    CHECK(fills[0].frame == 1);
    CHECK(fills[1].frame == 4);
}

TEST_CASE("smoothing twice adds nothing new") {
    redact::synth::SynthConfig cfg;
    cfg.seed = 29;
    cfg.n_frames = 150;
    cfg.n_tracks = 3;
    cfg.drop_rate = 0.25;
    cfg.fp_rate = 0.5;
    const DetectionStream degraded = redact::synth::generate(cfg).degraded;
    SmootherConfig sc;
    const DetectionStream once = redact::smooth(degraded, sc);
    CHECK(redact::smooth(once, sc) == once);
}

TEST_CASE("streams with no gaps pass through unchanged") {
    redact::synth::SynthConfig cfg;
    cfg.seed = 31;
    cfg.n_frames = 60;
    cfg.n_tracks = 2;
    const DetectionStream clean = redact::synth::generate(cfg).degraded;
    CHECK(redact::smooth(clean, SmootherConfig{}) == clean);
}

TEST_CASE("strip_synthesized removes only synthesized boxes") {
    DetectionStream s;
    BBox real(0, 0, 5, 5, 0.9);
    BBox fake(1, 1, 5, 5);
    fake.synth = true;
    s.records.push_back({0, {real, fake}});
    s.records.push_back({1, {fake}});
    s.frame_count = 2;
    const DetectionStream stripped = redact::strip_synthesized(s);
    REQUIRE(stripped.records.size() == 1);
    CHECK(stripped.records[0].boxes == std::vector<BBox>{real});
    CHECK(stripped.frame_count == 2);
}
