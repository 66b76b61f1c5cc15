#include <catch2/catch_amalgamated.hpp>

#include "redact/streams.hpp"
#include "redact/synth.hpp"

using redact::DetectionStream;
using redact::ParseError;

TEST_CASE("parse a minimal stream") {
    const auto result = redact::parse_stream(
        R"({"frame": 0, "boxes": [{"x": 1, "y": 2, "w": 3, "h": 4}]})"
        "\n"
        R"({"frame": 2, "boxes": [{"x": 0, "y": 0, "w": 5, "h": 5, "score": 0.75}]})"
        "\n");
    const DetectionStream& s = result.stream;
    REQUIRE(s.records.size() == 2);
    CHECK(s.frame_count == 3);
    CHECK(s.records[0].frame == 0);
    CHECK(s.records[1].frame == 2);
    REQUIRE(s.boxes_at(2).size() == 1);
    CHECK(s.boxes_at(2)[0].score == 0.75);
    CHECK(s.boxes_at(1).empty());
    CHECK(s.box_count() == 2);
    CHECK(result.merged_duplicates == 0);
}

TEST_CASE("meta header sets the frame count") {
    const auto s = redact::parse_stream(
        "{\"meta\": {\"frame_count\": 10}}\n"
        "{\"frame\": 3, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}]}\n");
    CHECK(s.stream.frame_count == 10);
}

TEST_CASE("meta header anywhere but first is rejected") {
    CHECK_THROWS_AS(redact::parse_stream("{\"frame\": 0, \"boxes\": []}\n"
                                         "{\"meta\": {\"frame_count\": 5}}\n"),
                    ParseError);
}

TEST_CASE("frame index beyond the declared count is rejected") {
    try {
        redact::parse_stream("{\"meta\": {\"frame_count\": 4}}\n"
                             "{\"frame\": 4, \"boxes\": []}\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("grammar violations carry the offending line") {
    // Line numbers count every physical line, including blanks.
    try {
        redact::parse_stream("{\"frame\": 0, \"boxes\": []}\n\nnot json at all\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }

    CHECK_THROWS_AS(redact::parse_stream("[1, 2]\n"), ParseError);
    CHECK_THROWS_AS(redact::parse_stream("{\"boxes\": []}\n"), ParseError);
    CHECK_THROWS_AS(redact::parse_stream("{\"frame\": -1, \"boxes\": []}\n"), ParseError);
    CHECK_THROWS_AS(redact::parse_stream("{\"frame\": 0}\n"), ParseError);
    CHECK_THROWS_AS(
        redact::parse_stream("{\"frame\": 0, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1}]}\n"),
        ParseError);
    CHECK_THROWS_AS(redact::parse_stream(
                        "{\"frame\": 0, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": -1, \"h\": 1}]}\n"),
                    ParseError);
    CHECK_THROWS_AS(
        redact::parse_stream(
            "{\"frame\": 0, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1, \"score\": 1.5}]}\n"),
        ParseError);
    CHECK_THROWS_AS(
        redact::parse_stream(
            "{\"frame\": 0, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1, \"synth\": 1}]}\n"),
        ParseError);
}

TEST_CASE("duplicate frame lines merge") {
    const auto result = redact::parse_stream(
        "{\"frame\": 1, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}]}\n"
        "{\"frame\": 1, \"boxes\": [{\"x\": 5, \"y\": 5, \"w\": 1, \"h\": 1}]}\n");
    CHECK(result.merged_duplicates == 1);
    REQUIRE(result.stream.records.size() == 1);
    CHECK(result.stream.records[0].boxes.size() == 2);
    CHECK(result.stream.records[0].boxes[0].x == 0.0);
    CHECK(result.stream.records[0].boxes[1].x == 5.0);
}

TEST_CASE("out-of-order records are sorted") {
    const auto s = redact::parse_stream(
        "{\"frame\": 5, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}]}\n"
        "{\"frame\": 2, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}]}\n");
    CHECK(s.stream.records[0].frame == 2);
    CHECK(s.stream.records[1].frame == 5);
}

TEST_CASE("empty box lists vanish but still extend the stream") {
    const auto s = redact::parse_stream(
        "{\"frame\": 0, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}]}\n"
        "{\"frame\": 7, \"boxes\": []}\n");
    CHECK(s.stream.records.size() == 1);
    CHECK(s.stream.frame_count == 8);
}

TEST_CASE("blank lines and surrounding whitespace are ignored") {
    const auto s = redact::parse_stream(
        "\n  \t\n{\"frame\": 0, \"boxes\": [{\"x\": 0, \"y\": 0, \"w\": 1, \"h\": 1}]}\r\n\n");
    CHECK(s.stream.records.size() == 1);
}

TEST_CASE("canonical serialization uses a fixed field order") {
    DetectionStream s;
    redact::BBox b(1, 2, 3, 4, 0.5);
    redact::BBox synth(5, 6, 7, 8);
    synth.synth = true;
    s.records.push_back({0, {b, synth}});
    s.frame_count = 1;
    CHECK(redact::write_stream(s) ==
          "{\"frame\":0,\"boxes\":[{\"x\":1.0,\"y\":2.0,\"w\":3.0,\"h\":4.0,\"score\":0.5},"
          "{\"x\":5.0,\"y\":6.0,\"w\":7.0,\"h\":8.0,\"synth\":true}]}\n");
}

TEST_CASE("meta is emitted exactly when it carries information") {
    DetectionStream s;
    s.records.push_back({0, {redact::BBox(0, 0, 1, 1)}});
    s.frame_count = 1;
    CHECK(redact::write_stream(s).find("meta") == std::string::npos);
    s.frame_count = 9;
    CHECK(redact::write_stream(s).rfind("{\"meta\":{\"frame_count\":9}}\n", 0) == 0);
}

TEST_CASE("parse inverts write on synthetic streams") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        redact::synth::SynthConfig cfg;
        cfg.seed = seed;
        cfg.n_frames = 40;
        cfg.n_tracks = 3;
        cfg.drop_rate = 0.3;
        cfg.fp_rate = 0.7;
        cfg.jitter = 1.5;
        const auto made = redact::synth::generate(cfg);
        for (const DetectionStream& s : {made.gt, made.degraded}) {
            const auto back = redact::parse_stream(redact::write_stream(s));
            CHECK(back.stream == s);
            CHECK(back.merged_duplicates == 0);
        }
    }
}

TEST_CASE("write inverts parse for hand-written text") {
    const std::string text =
        "{\"meta\":{\"frame_count\":6}}\n"
        "{\"frame\":1,\"boxes\":[{\"x\":1.5,\"y\":2.25,\"w\":3.0,\"h\":4.0,\"score\":0.25}]}\n"
        "{\"frame\":4,\"boxes\":[{\"x\":0.0,\"y\":0.0,\"w\":1.0,\"h\":1.0,\"synth\":true}]}\n";
    CHECK(redact::write_stream(redact::parse_stream(text).stream) == text);
}

TEST_CASE("filter_min_score keeps unscored boxes") {
    DetectionStream s;
    s.records.push_back({0, {redact::BBox(0, 0, 1, 1, 0.2), redact::BBox(0, 0, 1, 1, 0.8),
                             redact::BBox(0, 0, 1, 1)}});
    s.records.push_back({1, {redact::BBox(0, 0, 1, 1, 0.1)}});
    s.frame_count = 2;
    const DetectionStream kept = redact::filter_min_score(s, 0.5);
    REQUIRE(kept.records.size() == 1);
    CHECK(kept.records[0].boxes.size() == 2);
    CHECK(kept.frame_count == 2);
    CHECK(redact::filter_min_score(s, 0.0) == s);
}
