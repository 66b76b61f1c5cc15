#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "redact/geometry.hpp"

namespace redact {

/// Raised when a detection file violates the line-delimited grammar.
/// Carries the 1-based line number of the offending record.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct FrameRecord {
    int frame = 0;
    std::vector<BBox> boxes;

    bool operator==(const FrameRecord&) const = default;
};

/// Frame-indexed detections (or ground truth, which is the same shape with
/// scores omitted). Records are sorted ascending by frame and hold at least
/// one box each; frames without a record mean "zero detections". frame_count
/// is the video length and is always >= max frame index + 1.
struct DetectionStream {
    std::vector<FrameRecord> records;
    int frame_count = 0;

    bool operator==(const DetectionStream&) const = default;

    [[nodiscard]] std::span<const BBox> boxes_at(int frame) const {
        auto it = std::lower_bound(records.begin(), records.end(), frame,
                                   [](const FrameRecord& r, int f) { return r.frame < f; });
        if (it == records.end() || it->frame != frame) return {};
        return it->boxes;
    }

    [[nodiscard]] std::size_t box_count() const {
        std::size_t n = 0;
        for (const auto& r : records) n += r.boxes.size();
        return n;
    }
};

struct ParseResult {
    DetectionStream stream;
    std::size_t merged_duplicates = 0;  // duplicate frame lines folded together
};

namespace detail {

inline double require_number(const nlohmann::json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number())
        throw ParseError(line, std::string("box missing numeric field \"") + key + "\"");
    return it->get<double>();
}

inline BBox parse_box(const nlohmann::json& jb, std::size_t line) {
    if (!jb.is_object()) throw ParseError(line, "box entry is not an object");
    BBox b;
    b.x = require_number(jb, "x", line);
    b.y = require_number(jb, "y", line);
    b.w = require_number(jb, "w", line);
    b.h = require_number(jb, "h", line);
    if (b.w < 0.0) throw ParseError(line, "negative box width");
    if (b.h < 0.0) throw ParseError(line, "negative box height");
    if (auto it = jb.find("score"); it != jb.end()) {
        if (!it->is_number()) throw ParseError(line, "score is not a number");
        const double s = it->get<double>();
        if (s < 0.0 || s > 1.0) throw ParseError(line, "score outside [0,1]");
        b.score = s;
    }
    if (auto it = jb.find("synth"); it != jb.end()) {
        if (!it->is_boolean()) throw ParseError(line, "synth is not a boolean");
        b.synth = it->get<bool>();
    }
    return b;
}

}  // namespace detail

/// Parses the line-delimited stream grammar: one JSON object per line,
/// {"frame": n, "boxes": [{"x":..,"y":..,"w":..,"h":..}, ...]}, optionally
/// preceded by a {"meta": {"frame_count": n}} header. Duplicate frame lines
/// are merged by box-list concatenation and counted in the result. Records
/// whose box list is empty carry no information beyond their index and are
/// normalized away (the index still raises frame_count).
inline ParseResult parse_stream(const std::string& text) {
    ParseResult result;
    std::vector<FrameRecord> records;
    int max_frame = -1;
    bool have_meta = false;
    int meta_frame_count = 0;
    std::size_t meta_line = 0;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_object = true;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded()) throw ParseError(line_no, "malformed JSON");
        if (!obj.is_object()) throw ParseError(line_no, "record is not an object");

        if (obj.contains("meta")) {
            if (!first_object) throw ParseError(line_no, "meta header must be the first record");
            const auto& meta = obj["meta"];
            if (!meta.is_object() || !meta.contains("frame_count") ||
                !meta["frame_count"].is_number_integer())
                throw ParseError(line_no, "meta header missing integer frame_count");
            meta_frame_count = meta["frame_count"].get<int>();
            if (meta_frame_count < 0) throw ParseError(line_no, "negative frame_count");
            have_meta = true;
            meta_line = line_no;
            first_object = false;
            continue;
        }
        first_object = false;

        auto fit = obj.find("frame");
        if (fit == obj.end() || !fit->is_number_integer())
            throw ParseError(line_no, "record missing integer field \"frame\"");
        FrameRecord rec;
        rec.frame = fit->get<int>();
        if (rec.frame < 0) throw ParseError(line_no, "negative frame index");

        auto bit = obj.find("boxes");
        if (bit == obj.end() || !bit->is_array())
            throw ParseError(line_no, "record missing array field \"boxes\"");
        for (const auto& jb : *bit) rec.boxes.push_back(detail::parse_box(jb, line_no));

        if (have_meta && rec.frame >= meta_frame_count)
            throw ParseError(line_no, "frame index " + std::to_string(rec.frame) +
                                          " exceeds declared frame_count " +
                                          std::to_string(meta_frame_count));
        max_frame = std::max(max_frame, rec.frame);
        records.push_back(std::move(rec));
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const FrameRecord& a, const FrameRecord& b) { return a.frame < b.frame; });

    // Merge duplicates, drop empties.
    for (auto& rec : records) {
        if (!result.stream.records.empty() && result.stream.records.back().frame == rec.frame) {
            auto& dst = result.stream.records.back().boxes;
            dst.insert(dst.end(), rec.boxes.begin(), rec.boxes.end());
            ++result.merged_duplicates;
        } else {
            result.stream.records.push_back(std::move(rec));
        }
    }
    std::erase_if(result.stream.records, [](const FrameRecord& r) { return r.boxes.empty(); });

    result.stream.frame_count = have_meta ? meta_frame_count : max_frame + 1;
    (void)meta_line;
    return result;
}

/// Canonical serialization: frames ascending, one record per line, box fields
/// in x, y, w, h, score, synth order, numbers rendered shortest-round-trip.
/// A meta header is emitted only when frame_count carries information beyond
/// max frame index + 1, so parse(write(s)) == s for every valid stream.
inline std::string write_stream(const DetectionStream& s) {
    std::string out;
    int max_frame = -1;
    for (const auto& r : s.records)
        if (!r.boxes.empty()) max_frame = std::max(max_frame, r.frame);
    if (s.frame_count != max_frame + 1) {
        nlohmann::ordered_json meta;
        meta["meta"]["frame_count"] = s.frame_count;
        out += meta.dump();
        out += '\n';
    }
    for (const auto& r : s.records) {
        if (r.boxes.empty()) continue;
        nlohmann::ordered_json obj;
        obj["frame"] = r.frame;
        auto& arr = obj["boxes"] = nlohmann::ordered_json::array();
        for (const BBox& b : r.boxes) {
            nlohmann::ordered_json jb;
            jb["x"] = b.x;
            jb["y"] = b.y;
            jb["w"] = b.w;
            jb["h"] = b.h;
            if (b.score) jb["score"] = *b.score;
            if (b.synth) jb["synth"] = true;
            arr.push_back(std::move(jb));
        }
        out += obj.dump();
        out += '\n';
    }
    return out;
}

/// Drops boxes scored below min_score. Unscored boxes always pass; ground
/// truth is unscored by convention.
inline DetectionStream filter_min_score(const DetectionStream& s, double min_score) {
    DetectionStream out;
    out.frame_count = s.frame_count;
    for (const auto& r : s.records) {
        FrameRecord kept;
        kept.frame = r.frame;
        for (const BBox& b : r.boxes)
            if (!b.score || *b.score >= min_score) kept.boxes.push_back(b);
        if (!kept.boxes.empty()) out.records.push_back(std::move(kept));
    }
    return out;
}

}  // namespace redact
