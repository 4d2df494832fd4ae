// blurvitals: synthesize, blur, process and evaluate NIR sleep clips.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <blurvitals/error.hpp>
#include <blurvitals/eval.hpp>
#include <blurvitals/optics.hpp>
#include <blurvitals/parallel.hpp>
#include <blurvitals/pipeline.hpp>
#include <blurvitals/records.hpp>
#include <blurvitals/synth.hpp>
#include <blurvitals/vidio.hpp>

namespace fs = std::filesystem;
using namespace blurvitals;

namespace {

struct PipelineFlags {
    std::vector<int> scales = grid::default_scales();
    double window_sec = 10.0;
    double hop_sec = 1.0;
    std::vector<double> hr_band{spectra::kHeartBand.lo, spectra::kHeartBand.hi};
    std::vector<double> rr_band{spectra::kBreathBand.lo, spectra::kBreathBand.hi};
    std::size_t roi_k = 10;
    double min_snr_db = 0.0;
    double gate_threshold = 1.0;
    double max_displacement = 8.0;
    std::string rr_source = "axis";

    PipelineConfig build() const {
        PipelineConfig c;
        c.scales = scales;
        c.window_sec = window_sec;
        c.hop_sec = hop_sec;
        c.fuse.hr_band = {hr_band.at(0), hr_band.at(1)};
        c.fuse.rr_band = {rr_band.at(0), rr_band.at(1)};
        c.fuse.roi_k = roi_k;
        c.fuse.min_snr_db = min_snr_db;
        c.fuse.gating.threshold = gate_threshold;
        c.fuse.rr_source = rr_source == "theta" ? fuse::RrSource::theta : fuse::RrSource::axis;
        c.flow.max_displacement = max_displacement;
        return c;
    }
};

void add_pipeline_flags(CLI::App* app, PipelineFlags& f) {
    app->add_option("--scales", f.scales, "Block sizes in pixels")->delimiter(',')->capture_default_str();
    app->add_option("--window-sec", f.window_sec, "Analysis window length (s)")->capture_default_str();
    app->add_option("--hop-sec", f.hop_sec, "Hop between windows (s)")->capture_default_str();
    app->add_option("--hr-band", f.hr_band, "Heart-rate band lo,hi (Hz)")->delimiter(',')->expected(2)->capture_default_str();
    app->add_option("--rr-band", f.rr_band, "Respiration band lo,hi (Hz)")->delimiter(',')->expected(2)->capture_default_str();
    app->add_option("--roi-k", f.roi_k, "Blocks kept per heatmap")->capture_default_str();
    app->add_option("--min-snr-db", f.min_snr_db, "Minimum block SNR for selection (dB)")->capture_default_str();
    app->add_option("--gate-threshold", f.gate_threshold, "Motion intensity above which a window is gated")
        ->capture_default_str();
    app->add_option("--max-displacement", f.max_displacement, "Flow displacement cap (px)")->capture_default_str();
    app->add_option("--rr-source", f.rr_source, "Respiration trace: axis (best of dx/dy) or theta")
        ->check(CLI::IsMember({"axis", "theta"}))
        ->capture_default_str();
}

struct SceneFlags {
    synth::SceneConfig cfg;
    std::vector<std::string> events;

    synth::SceneConfig build() const {
        synth::SceneConfig c = cfg;
        c.motion_events.clear();
        for (const auto& s : events) {
            synth::MotionEvent e;
            char tail = 0;
            if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &e.start_s, &e.end_s, &e.displacement_px, &tail) != 3)
                throw ValidationError("motion event '" + s + "' is not start,end,displacement");
            c.motion_events.push_back(e);
        }
        c.validate();
        return c;
    }
};

void add_scene_flags(CLI::App* app, SceneFlags& f) {
    auto& c = f.cfg;
    app->add_option("--hr", c.hr, "Heart rate (bpm)")->capture_default_str();
    app->add_option("--rr", c.rr, "Respiratory rate (breaths/min)")->capture_default_str();
    app->add_option("--duration", c.duration, "Clip duration (s)")->capture_default_str();
    app->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    app->add_option("--fps", c.fps, "Frame rate")->capture_default_str();
    app->add_option("--width", c.width, "Frame width (px)")->capture_default_str();
    app->add_option("--height", c.height, "Frame height (px)")->capture_default_str();
    app->add_option("--bit-depth", c.bit_depth, "Sample depth, 8 or 16")->capture_default_str();
    app->add_option("--pulse-amplitude", c.pulse_amplitude, "Fractional pulsatile amplitude")->capture_default_str();
    app->add_option("--breath-amplitude", c.breath_amplitude, "Chest displacement amplitude (px)")->capture_default_str();
    app->add_option("--noise-sigma", c.noise_sigma, "Sensor noise std (intensity units)")->capture_default_str();
    app->add_option("--illumination", c.illumination, "Scale on scene brightness")->capture_default_str();
    app->add_option("--posture-deg", c.posture_deg, "Chest motion orientation (deg); 90 is supine")
        ->capture_default_str();
    app->add_flag("--covered", c.covered, "Cover the body with a sheet");
    app->add_option("--motion-event", f.events, "Body movement start,end,displacement (s,s,px); repeatable");
}

fs::path estimates_name(const fs::path& clip) { return clip.stem().string() + ".ndjson"; }

int cmd_synth(const SceneFlags& scene, const PipelineFlags& pipe, const fs::path& out, bool suite, std::size_t postures,
              const std::vector<double>& radii, double blur_radius) {
    const synth::SceneConfig cfg = scene.build();
    const PipelineConfig pc = pipe.build();
    pc.validate(cfg.fps);
    const auto plan = pc.plan(cfg.fps);
    const optics::PsfKernel psf = optics::disc_psf(blur_radius);
    if (suite) {
        const auto m = synth::render_condition_suite(cfg, postures, radii, out, plan);
        std::cout << "wrote " << m.entries.size() << " clips and " << (out / "manifest.json").string() << "\n";
        return 0;
    }
    const synth::SceneRenderer renderer(cfg);
    if (cfg.frame_count() < plan.window_len)
        std::cerr << "warning: clip is shorter than one analysis window; truth series will be empty\n";
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!fs::is_directory(out)) throw IoError(out, "cannot create output directory");
    const synth::Condition cond{cfg.covered, blur_radius, cfg.posture_deg};
    vidio::VideoClip clip = renderer.render_clip(&psf);
    clip.label = cond.label();
    vidio::write_clip(clip, out / "clip.bvr");
    synth::write_truth(renderer.ground_truth(plan), out / "clip.truth.json");
    synth::Manifest m;
    m.dir = out;
    m.entries.push_back({"clip.bvr", "clip.truth.json", cond});
    synth::write_manifest(m, out / "manifest.json");
    std::cout << "wrote " << (out / "clip.bvr").string() << " (" << clip.size() << " frames)\n";
    return 0;
}

int cmd_blur(const fs::path& in, const fs::path& out, double radius) {
    const optics::PsfKernel psf = optics::disc_psf(radius);
    vidio::VideoClip clip = vidio::read_clip(in);
    vidio::VideoClip blurred = optics::blur_clip(clip, psf);
    blurred.label = clip.label;
    vidio::write_clip(blurred, out);
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_process(const PipelineFlags& pipe, const fs::path& in, const fs::path& pgm_dir, double pgm_fps,
                const fs::path& out) {
    const PipelineConfig pc = pipe.build();
    if (!pgm_dir.empty() && !(pgm_fps > 0.0)) throw ValidationError("--fps must be positive");
    const vidio::VideoClip clip = pgm_dir.empty() ? vidio::read_clip(in) : vidio::read_pgm_sequence(pgm_dir, pgm_fps);
    pc.validate(clip.fps);
    const auto est = process_clip(clip, pc);
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    records::write_estimates(est, out);
    std::size_t gated = 0;
    for (const auto& e : est) gated += e.gated ? 1 : 0;
    std::cout << "wrote " << est.size() << " records (" << gated << " gated) to " << out.string() << "\n";
    return 0;
}

int run_eval(const synth::Manifest& manifest, const PipelineConfig& pc, const eval::BenchmarkOptions& opt,
             const fs::path& out, bool svg) {
    const auto report = eval::run_benchmark(manifest, pc, opt);
    const auto paths = eval::write_report(report, out, svg);
    for (const auto& row : report.rows)
        if (!row.ok()) std::cerr << "warning: " << row.id << ": " << row.error << "\n";
    std::cout << eval::summary_line(report) << "\n";
    std::cout << "report: " << paths.json.string() << "\n";
    return 0;
}

int cmd_eval(const PipelineFlags& pipe, const fs::path& manifest_path, const fs::path& out, const fs::path& est_dir,
             const fs::path& est_out, bool truth_injection, bool svg) {
    const PipelineConfig pc = pipe.build();
    const auto manifest = synth::read_manifest(manifest_path);
    eval::BenchmarkOptions opt;
    opt.truth_injection = truth_injection;
    if (!est_dir.empty()) opt.estimates_in = est_dir;
    if (!est_out.empty()) opt.estimates_out = est_out;
    // fps is only known per clip; validate against every readable truth file.
    // Unreadable ones are reported per clip by the benchmark.
    for (const auto& e : manifest.entries) {
        double fps = 0.0;
        try {
            fps = synth::read_truth(manifest.truth_path(e)).fps;
        } catch (const DataError&) {
            continue;
        } catch (const IoError&) {
            continue;
        }
        pc.validate(fps);
    }
    return run_eval(manifest, pc, opt, out, svg);
}

int cmd_demo(const SceneFlags& scene, const PipelineFlags& pipe, const fs::path& out, std::size_t postures,
             const std::vector<double>& radii, bool svg) {
    const synth::SceneConfig cfg = scene.build();
    const PipelineConfig pc = pipe.build();
    pc.validate(cfg.fps);
    const auto plan = pc.plan(cfg.fps);
    if (cfg.frame_count() < plan.window_len)
        throw ValidationError("demo duration is shorter than one analysis window");
    std::cout << "synth: rendering corpus\n";
    const auto manifest = synth::render_condition_suite(cfg, postures, radii, out / "corpus", plan);
    std::cout << "process: " << manifest.entries.size() << " clips\n";
    const fs::path est_dir = out / "estimates";
    fs::create_directories(est_dir);
    for (const auto& e : manifest.entries) {
        const auto clip = vidio::read_clip(manifest.clip_path(e));
        records::write_estimates(process_clip(clip, pc), est_dir / estimates_name(e.clip));
    }
    std::cout << "eval:\n";
    eval::BenchmarkOptions opt;
    opt.estimates_in = est_dir;
    return run_eval(manifest, pc, opt, out / "report", svg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heart and respiratory rate from defocused NIR video"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    SceneFlags scene;
    SceneFlags demo_scene;
    demo_scene.cfg.duration = 20.0;
    std::size_t demo_postures = 1;
    PipelineFlags pipe;
    fs::path out, in, manifest, pgm_dir, est_dir, est_out;
    double blur_radius = 0.0;
    double pgm_fps = 20.0;
    bool suite = false, emit_svg = false, truth_injection = false;
    std::size_t postures = 3;
    std::vector<double> blur_radii{6.0};

    auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic clip or condition suite with ground truth");
    add_scene_flags(synth_cmd, scene);
    add_pipeline_flags(synth_cmd, pipe);
    synth_cmd->add_option("--out", out, "Output directory")->required();
    synth_cmd->add_option("--blur-radius", blur_radius, "Defocus disc radius (px), single clip mode")
        ->capture_default_str();
    synth_cmd->add_flag("--suite", suite, "Render covered/uncovered x blur x posture suite");
    synth_cmd->add_option("--postures", postures, "Posture count for --suite (1-3)")->capture_default_str();
    synth_cmd->add_option("--blur-radii", blur_radii, "Blur radii for --suite besides clear")
        ->delimiter(',')
        ->capture_default_str();

    auto* blur_cmd = app.add_subcommand("blur", "Apply disc defocus to a clip");
    blur_cmd->add_option("--in", in, "Input clip")->required();
    blur_cmd->add_option("--out", out, "Output clip")->required();
    blur_cmd->add_option("--blur-radius", blur_radius, "Defocus disc radius (px); 0 copies")->required();

    auto* process_cmd = app.add_subcommand("process", "Estimate HR/RR per window for one clip");
    add_pipeline_flags(process_cmd, pipe);
    auto* in_opt = process_cmd->add_option("--in", in, "Input clip");
    auto* pgm_opt = process_cmd->add_option("--pgm-dir", pgm_dir, "Directory of numbered PGM frames instead of --in");
    in_opt->excludes(pgm_opt);
    process_cmd->add_option("--fps", pgm_fps, "Frame rate of a PGM sequence")->capture_default_str();
    process_cmd->add_option("--out", out, "Estimates file (NDJSON)")->required();

    auto* eval_cmd = app.add_subcommand("eval", "Benchmark a manifest against its ground truth");
    add_pipeline_flags(eval_cmd, pipe);
    eval_cmd->add_option("--manifest", manifest, "Corpus manifest.json")->required();
    eval_cmd->add_option("--out", out, "Report directory")->required();
    eval_cmd->add_option("--estimates", est_dir, "Read <clip>.ndjson estimates from here instead of processing");
    eval_cmd->add_option("--estimates-out", est_out, "Also write per-clip estimates here");
    eval_cmd->add_flag("--truth-injection", truth_injection, "Score the truth against itself (harness check)");
    eval_cmd->add_flag("--emit-svg", emit_svg, "Write boxplot and scatter SVGs");

    auto* demo_cmd = app.add_subcommand("demo", "synth -> blur -> process -> eval on a small suite");
    add_scene_flags(demo_cmd, demo_scene);
    add_pipeline_flags(demo_cmd, pipe);
    demo_cmd->add_option("--out", out, "Output directory")->required();
    demo_cmd->add_option("--postures", demo_postures, "Posture count (1-3)")->capture_default_str();
    demo_cmd->add_option("--blur-radius", blur_radii, "Blur radii besides clear")->delimiter(',')->capture_default_str();
    demo_cmd->add_flag("--emit-svg", emit_svg, "Write boxplot and scatter SVGs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto threads = thread_limit_from_env();
    try {
        if (*synth_cmd) return cmd_synth(scene, pipe, out, suite, postures, blur_radii, blur_radius);
        if (*blur_cmd) return cmd_blur(in, out, blur_radius);
        if (*process_cmd) {
            if (in.empty() && pgm_dir.empty()) throw ValidationError("one of --in or --pgm-dir is required");
            return cmd_process(pipe, in, pgm_dir, pgm_fps, out);
        }
        if (*eval_cmd) return cmd_eval(pipe, manifest, out, est_dir, est_out, truth_injection, emit_svg);
        if (*demo_cmd) return cmd_demo(demo_scene, pipe, out, demo_postures, blur_radii, emit_svg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(ErrorKind::io);
    }
    return 0;
}
