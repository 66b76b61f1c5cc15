// Command-line front end for the anonymization toolkit: temporal smoothing,
// activation metrics, threshold sweeps, frame redaction, synthetic benchmark
// generation, and numeric self-checks.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error
// (malformed input files, unreadable frames). Diagnostics go to stderr so
// the data channels compose in shell pipelines.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "redact/redact.hpp"

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

redact::DetectionStream load_stream(const std::filesystem::path& path) {
    auto result = redact::parse_stream(read_file(path));
    if (result.merged_duplicates > 0)
        std::cerr << path.string() << ": merged " << result.merged_duplicates
                  << " duplicate frame record(s)\n";
    return std::move(result.stream);
}

/// Parses "start:stop:step" (stop inclusive within 1e-9) or a single value.
std::vector<double> parse_threshold_range(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ':')) parts.push_back(std::stod(token));
    std::vector<double> thresholds;
    if (parts.size() == 1) {
        thresholds.push_back(parts[0]);
    } else if (parts.size() == 3) {
        const double start = parts[0], stop = parts[1], step = parts[2];
        if (step <= 0.0) throw std::invalid_argument("threshold step must be positive");
        for (double t = start; t <= stop + 1e-9; t += step) thresholds.push_back(t);
    } else {
        throw std::invalid_argument("thresholds must be <value> or <start>:<stop>:<step>");
    }
    for (double t : thresholds) redact::check_threshold(t);
    return thresholds;
}

struct SmoothArgs {
    std::string in, out;
    int k = 3;
    double link_iou = 0.3;
    bool unilateral = false;
};

int run_smooth(const SmoothArgs& args) {
    if (args.k < 3 || args.k % 2 == 0) {
        std::cerr << "smooth: k must be odd and >= 3\n";
        return 1;
    }
    redact::SmootherConfig cfg;
    cfg.k = args.k;
    cfg.link_iou = args.link_iou;
    cfg.require_bilateral = !args.unilateral;
    cfg.validate();
    const auto stream = load_stream(args.in);
    write_file(args.out, redact::write_stream(redact::smooth(stream, cfg)));
    return 0;
}

struct EvalArgs {
    std::string dets, gt;
    double iou = 0.3;
    double min_score = 0.0;
};

int run_eval(const EvalArgs& args) {
    redact::check_threshold(args.iou);
    const auto dets = redact::filter_min_score(load_stream(args.dets), args.min_score);
    const auto gts = load_stream(args.gt);
    const auto counts = redact::count_activations(dets, gts, args.iou);
    const auto report = redact::prf(counts, args.iou);
    std::printf("tp=%ld fp=%ld fn=%ld precision=%.6f recall=%.6f f1=%.6f\n", counts.tp,
                counts.fp, counts.fn, report.precision, report.recall, report.f1);
    return 0;
}

struct SweepArgs {
    std::string dets, gt, thresholds = "0.1:0.9:0.1", csv;
    double min_score = 0.0;
};

int run_sweep(const SweepArgs& args) {
    const auto thresholds = parse_threshold_range(args.thresholds);
    const auto dets = redact::filter_min_score(load_stream(args.dets), args.min_score);
    const auto gts = load_stream(args.gt);
    const auto rows = redact::sweep(dets, gts, thresholds);
    const std::string csv = redact::emit_report(rows);
    if (args.csv.empty())
        std::cout << csv;
    else
        write_file(args.csv, csv);
    return 0;
}

struct AnonymizeArgs {
    std::string frames, dets, out;
    std::string mode = "pixelate";
    redact::AnonymizeConfig cfg;
};

int run_anonymize(const AnonymizeArgs& args) {
    redact::AnonymizeConfig cfg = args.cfg;
    if (args.mode == "pixelate")
        cfg.mode = redact::RedactMode::Pixelate;
    else if (args.mode == "blur")
        cfg.mode = redact::RedactMode::BoxBlur;
    else
        throw std::invalid_argument("mode must be pixelate or blur");
    cfg.validate();
    const auto stream = load_stream(args.dets);
    const auto summary = redact::anonymize_video(args.frames, stream, cfg, args.out);
    std::cout << summary.to_json() << '\n';
    for (const auto& err : summary.errors) std::cerr << "anonymize: " << err << '\n';
    return 0;
}

struct SynthArgs {
    redact::synth::SynthConfig cfg;
    std::string out_gt, out_dets, out_log;
};

int run_synth(const SynthArgs& args) {
    args.cfg.validate();
    const auto result = redact::synth::generate(args.cfg);
    write_file(args.out_gt, redact::write_stream(result.gt));
    write_file(args.out_dets, redact::write_stream(result.degraded));
    if (!args.out_log.empty())
        write_file(args.out_log, redact::synth::write_drop_log(result.log));
    std::cerr << "synth: " << result.gt.box_count() << " truth boxes, "
              << result.degraded.box_count() << " detections, " << result.log.entries.size()
              << " drops\n";
    return 0;
}

int run_selftest() {
    bool all_ok = true;
    for (const auto& check : redact::selftest::run_all()) {
        std::printf("%s %s (%s)\n", check.passed ? "PASS" : "FAIL", check.name.c_str(),
                    check.detail.c_str());
        all_ok = all_ok && check.passed;
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detection-stream anonymization toolkit for surgical video"};
    app.require_subcommand(1);

    SmoothArgs smooth_args;
    auto* smooth = app.add_subcommand("smooth", "Fill temporal detection gaps by sliding-average");
    smooth->add_option("--in", smooth_args.in, "input detection stream")->required();
    smooth->add_option("--out", smooth_args.out, "output stream path")->required();
    smooth->add_option("--k", smooth_args.k, "kernel size (odd, >= 3)")->required();
    smooth->add_option("--link-iou", smooth_args.link_iou, "track linking IoU threshold");
    smooth->add_flag("--unilateral", smooth_args.unilateral,
                     "allow fills supported from one side only");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Score detections against ground truth");
    eval->add_option("--dets", eval_args.dets, "detection stream")->required();
    eval->add_option("--gt", eval_args.gt, "ground-truth stream")->required();
    eval->add_option("--iou", eval_args.iou, "IoU threshold");
    eval->add_option("--min-score", eval_args.min_score, "drop detections scored below this");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Precision/recall across IoU thresholds");
    sweep->add_option("--dets", sweep_args.dets, "detection stream")->required();
    sweep->add_option("--gt", sweep_args.gt, "ground-truth stream")->required();
    sweep->add_option("--thresholds", sweep_args.thresholds, "range start:stop:step");
    sweep->add_option("--csv", sweep_args.csv, "CSV output path (default stdout)");
    sweep->add_option("--min-score", sweep_args.min_score, "drop detections scored below this");

    AnonymizeArgs anon_args;
    auto* anon = app.add_subcommand("anonymize", "Redact detected regions in frame images");
    anon->add_option("--frames", anon_args.frames, "input frame directory")->required();
    anon->add_option("--dets", anon_args.dets, "detection stream")->required();
    anon->add_option("--out", anon_args.out, "output frame directory")->required();
    anon->add_option("--mode", anon_args.mode, "pixelate or blur");
    anon->add_option("--block", anon_args.cfg.block, "pixelation cell size");
    anon->add_option("--radius", anon_args.cfg.radius, "blur radius");
    anon->add_option("--passes", anon_args.cfg.passes, "blur passes");
    anon->add_option("--margin", anon_args.cfg.margin_frac, "expansion margin fraction");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark instance");
    synth->add_option("--seed", synth_args.cfg.seed, "RNG seed")->required();
    synth->add_option("--frames", synth_args.cfg.n_frames, "number of frames")->required();
    synth->add_option("--tracks", synth_args.cfg.n_tracks, "number of tracks")->required();
    synth->add_option("--drop-rate", synth_args.cfg.drop_rate, "per-box drop probability");
    synth->add_option("--fp-rate", synth_args.cfg.fp_rate, "expected false positives per frame");
    synth->add_option("--jitter", synth_args.cfg.jitter, "positional noise, pixels");
    synth->add_option("--width", synth_args.cfg.frame_w, "frame width");
    synth->add_option("--height", synth_args.cfg.frame_h, "frame height");
    synth->add_option("--max-consecutive-drops", synth_args.cfg.max_consecutive_drops,
                      "longest drop run per track");
    synth->add_option("--out-gt", synth_args.out_gt, "ground-truth output path")->required();
    synth->add_option("--out-dets", synth_args.out_dets, "degraded detections output path")
        ->required();
    synth->add_option("--out-log", synth_args.out_log, "drop-log output path");

    auto* selftest = app.add_subcommand("selftest", "Run numeric verification checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (smooth->parsed()) return run_smooth(smooth_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (sweep->parsed()) return run_sweep(sweep_args);
        if (anon->parsed()) return run_anonymize(anon_args);
        if (synth->parsed()) return run_synth(synth_args);
        if (selftest->parsed()) return run_selftest();
    } catch (const redact::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
