#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "redact/geometry.hpp"
#include "redact/streams.hpp"

namespace redact::synth {

struct SynthConfig {
    std::uint64_t seed = 1;
    int n_frames = 100;
    int n_tracks = 3;
    int frame_w = 1280;
    int frame_h = 720;
    double drop_rate = 0.0;          // per-box drop probability
    double fp_rate = 0.0;            // expected injected false positives per frame
    double jitter = 0.0;             // uniform positional noise on detections, pixels
    int max_consecutive_drops = 1;   // longest drop run allowed within a track
    double box_min = 40.0;           // box side range, pixels
    double box_max = 120.0;

    void validate() const {
        if (n_frames <= 0 || n_tracks <= 0)
            throw std::invalid_argument("synth: frames and tracks must be positive");
        if (frame_w <= 0 || frame_h <= 0)
            throw std::invalid_argument("synth: frame dimensions must be positive");
        if (drop_rate < 0.0 || drop_rate >= 1.0)
            throw std::invalid_argument("synth: drop_rate must be in [0,1)");
        if (fp_rate < 0.0) throw std::invalid_argument("synth: fp_rate must be >= 0");
        if (jitter < 0.0) throw std::invalid_argument("synth: jitter must be >= 0");
        if (max_consecutive_drops < 1)
            throw std::invalid_argument("synth: max_consecutive_drops must be >= 1");
        if (box_min <= 0.0 || box_max < box_min)
            throw std::invalid_argument("synth: bad box size range");
    }
};

struct DropEntry {
    int track = 0;
    int frame = 0;
    BBox box;                  // the ground-truth box that went missing
    bool bilateral_k3 = false; // detections survive at both adjacent frames
};

struct DropLog {
    std::vector<DropEntry> entries;
};

struct SynthResult {
    DetectionStream gt;
    DetectionStream degraded;
    DropLog log;
};

namespace detail {

// Distribution transforms are hand-rolled on top of the (fully specified)
// mt19937_64 engine so one seed produces the same bytes on every platform.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * unit(); }
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= unit();
        } while (p > limit);
        return k - 1;
    }
};

struct TrackSim {
    std::vector<BBox> boxes;       // per frame
    std::vector<bool> dropped;     // per frame
};

inline void reflect(double& pos, double& vel, double limit) {
    if (limit <= 0.0) {  // box as wide as the frame; pin it
        pos = 0.0;
        vel = 0.0;
        return;
    }
    while (pos < 0.0 || pos > limit) {
        if (pos < 0.0) pos = -pos;
        if (pos > limit) pos = 2.0 * limit - pos;
        vel = -vel;
    }
}

}  // namespace detail

/// Deterministic benchmark generator. Tracks move with constant velocity and
/// reflect at the frame borders; the degraded stream is the ground truth
/// minus per-box drops (runs capped at max_consecutive_drops), with optional
/// positional jitter, plus Poisson(fp_rate) injected false positives per
/// frame. Injected boxes are rejection-sampled to stay disjoint from every
/// ground-truth box and every other injected box within eight frames either
/// side, so tallies recomputed from the drop log stay exact. The log records
/// every drop and whether its track still has detections on both adjacent
/// frames.
inline SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    detail::Rng rng(cfg.seed);
    SynthResult out;
    out.gt.frame_count = cfg.n_frames;
    out.degraded.frame_count = cfg.n_frames;

    // Track shapes and motion.
    std::vector<detail::TrackSim> tracks(static_cast<std::size_t>(cfg.n_tracks));
    for (auto& track : tracks) {
        const double w = rng.uniform(cfg.box_min, std::min(cfg.box_max, double(cfg.frame_w)));
        const double h = rng.uniform(cfg.box_min, std::min(cfg.box_max, double(cfg.frame_h)));
        double x = rng.uniform(0.0, std::max(0.0, cfg.frame_w - w));
        double y = rng.uniform(0.0, std::max(0.0, cfg.frame_h - h));
        double vx = rng.uniform(-3.0, 3.0);
        double vy = rng.uniform(-3.0, 3.0);
        track.boxes.reserve(static_cast<std::size_t>(cfg.n_frames));
        for (int f = 0; f < cfg.n_frames; ++f) {
            track.boxes.emplace_back(x, y, w, h);
            x += vx;
            y += vy;
            detail::reflect(x, vx, cfg.frame_w - w);
            detail::reflect(y, vy, cfg.frame_h - h);
        }
        track.dropped.assign(static_cast<std::size_t>(cfg.n_frames), false);
    }

    // Drop decisions, then bilateral flags once the runs are known.
    for (int ti = 0; ti < cfg.n_tracks; ++ti) {
        auto& track = tracks[static_cast<std::size_t>(ti)];
        int run = 0;
        for (int f = 0; f < cfg.n_frames; ++f) {
            const bool want_drop = rng.unit() < cfg.drop_rate;
            if (want_drop && run < cfg.max_consecutive_drops) {
                track.dropped[static_cast<std::size_t>(f)] = true;
                ++run;
            } else {
                run = 0;
            }
        }
        for (int f = 0; f < cfg.n_frames; ++f) {
            if (!track.dropped[static_cast<std::size_t>(f)]) continue;
            const bool left = f - 1 >= 0 && !track.dropped[static_cast<std::size_t>(f - 1)];
            const bool right =
                f + 1 < cfg.n_frames && !track.dropped[static_cast<std::size_t>(f + 1)];
            out.log.entries.push_back(
                {ti, f, track.boxes[static_cast<std::size_t>(f)], left && right});
        }
    }

    // Jittered survivor detections with scores.
    std::vector<std::vector<BBox>> dets(static_cast<std::size_t>(cfg.n_frames));
    for (int ti = 0; ti < cfg.n_tracks; ++ti) {
        auto& track = tracks[static_cast<std::size_t>(ti)];
        for (int f = 0; f < cfg.n_frames; ++f) {
            if (track.dropped[static_cast<std::size_t>(f)]) continue;
            BBox det = track.boxes[static_cast<std::size_t>(f)];
            if (cfg.jitter > 0.0) {
                det.x += rng.uniform(-cfg.jitter, cfg.jitter);
                det.y += rng.uniform(-cfg.jitter, cfg.jitter);
            }
            det.score = rng.uniform(0.5, 1.0);
            dets[static_cast<std::size_t>(f)].push_back(det);
        }
    }

    // Injected false positives, kept clear of nearby truth and of each other.
    constexpr int kClearWindow = 8;
    std::vector<std::vector<BBox>> fps(static_cast<std::size_t>(cfg.n_frames));
    for (int f = 0; f < cfg.n_frames; ++f) {
        const int n_fp = rng.poisson(cfg.fp_rate);
        for (int i = 0; i < n_fp; ++i) {
            for (int attempt = 0; attempt < 100; ++attempt) {
                const double w =
                    rng.uniform(cfg.box_min, std::min(cfg.box_max, double(cfg.frame_w)));
                const double h =
                    rng.uniform(cfg.box_min, std::min(cfg.box_max, double(cfg.frame_h)));
                BBox fp(rng.uniform(0.0, std::max(0.0, cfg.frame_w - w)),
                        rng.uniform(0.0, std::max(0.0, cfg.frame_h - h)), w, h);
                bool clear = true;
                for (int g = std::max(0, f - kClearWindow);
                     clear && g <= std::min(cfg.n_frames - 1, f + kClearWindow); ++g) {
                    for (const auto& track : tracks)
                        if (intersection_area(fp, track.boxes[static_cast<std::size_t>(g)]) >
                            0.0) {
                            clear = false;
                            break;
                        }
                    for (const BBox& other : fps[static_cast<std::size_t>(g)])
                        if (intersection_area(fp, other) > 0.0) {
                            clear = false;
                            break;
                        }
                }
                if (clear) {
                    fp.score = rng.uniform(0.05, 0.95);
                    fps[static_cast<std::size_t>(f)].push_back(fp);
                    break;
                }
            }
        }
    }

    // Assemble frame records: ground truth in track order, detections as
    // surviving tracks then injected boxes.
    for (int f = 0; f < cfg.n_frames; ++f) {
        FrameRecord gt_rec;
        gt_rec.frame = f;
        for (const auto& track : tracks)
            gt_rec.boxes.push_back(track.boxes[static_cast<std::size_t>(f)]);
        out.gt.records.push_back(std::move(gt_rec));

        FrameRecord det_rec;
        det_rec.frame = f;
        det_rec.boxes = dets[static_cast<std::size_t>(f)];
        det_rec.boxes.insert(det_rec.boxes.end(), fps[static_cast<std::size_t>(f)].begin(),
                             fps[static_cast<std::size_t>(f)].end());
        if (!det_rec.boxes.empty()) out.degraded.records.push_back(std::move(det_rec));
    }
    return out;
}

/// One log entry per line, same record style as the stream files.
inline std::string write_drop_log(const DropLog& log) {
    std::string out;
    for (const DropEntry& e : log.entries) {
        nlohmann::ordered_json j;
        j["track"] = e.track;
        j["frame"] = e.frame;
        j["box"]["x"] = e.box.x;
        j["box"]["y"] = e.box.y;
        j["box"]["w"] = e.box.w;
        j["box"]["h"] = e.box.h;
        j["bilateral_k3"] = e.bilateral_k3;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace redact::synth
