#pragma once

// Synthetic sleep-scene generator with known heart rate, respiratory rate,
// bedsheet occlusion and gross body movement, plus its ground truth.
//
// Scene layers, back to front: a low-contrast textured background, an
// elliptical skin region whose intensity carries the pulse, and a textured
// chest rectangle translated by the breathing displacement. Motion events
// shift face and chest together. Sensor noise is added after any optics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "image.hpp"
#include "optics.hpp"
#include "parallel.hpp"
#include "spectra.hpp"
#include "vidio.hpp"

namespace blurvitals::synth {

struct MotionEvent {
    double start_s = 0.0;
    double end_s = 0.0;
    /// Horizontal whole-body shift reached at the end of the event; it persists afterwards.
    double displacement_px = 0.0;
};

struct SceneConfig {
    int width = 160;
    int height = 192;
    double fps = 20.0;
    double duration = 60.0;
    double hr = 72.0;
    double rr = 15.0;
    double pulse_amplitude = 0.005;
    double breath_amplitude = 2.0;
    double noise_sigma = 1.0;
    bool covered = false;
    std::vector<MotionEvent> motion_events;
    std::uint64_t seed = 1;
    /// Orientation of in-plane chest motion; 90 stands for a supine subject.
    double posture_deg = 0.0;
    /// Global scale on every layer's DC level (LED power).
    double illumination = 1.0;
    int bit_depth = 8;

    std::size_t frame_count() const { return static_cast<std::size_t>(std::lround(duration * fps)); }
    double level_scale() const { return bit_depth == 16 ? 256.0 : 1.0; }

    void validate() const {
        auto fail = [](const std::string& m) { throw ValidationError(m); };
        if (width < 64 || height < 64) fail("scene must be at least 64x64 pixels");
        if (!(fps > 0.0)) fail("fps must be positive");
        if (!(duration > 0.0)) fail("duration must be positive");
        if (!(hr >= 42.0 && hr <= 180.0)) fail("hr must lie in [42, 180] bpm");
        if (!(rr >= 6.0 && rr <= 42.0)) fail("rr must lie in [6, 42] bpm");
        if (!(hr / 60.0 < fps / 2.0) || !(rr / 60.0 < fps / 2.0)) fail("hr and rr must lie below Nyquist");
        if (!(pulse_amplitude >= 0.0 && pulse_amplitude <= 0.05)) fail("pulse_amplitude must lie in [0, 0.05]");
        if (!(breath_amplitude >= 0.0 && breath_amplitude <= 10.0)) fail("breath_amplitude must lie in [0, 10]");
        if (!(noise_sigma >= 0.0)) fail("noise_sigma must be non-negative");
        if (!(illumination > 0.0 && illumination <= 1.5)) fail("illumination must lie in (0, 1.5]");
        if (bit_depth != 8 && bit_depth != 16) fail("bit depth must be 8 or 16");
        for (const auto& e : motion_events)
            if (!(e.start_s >= 0.0 && e.end_s > e.start_s && e.end_s <= duration))
                fail("motion event must satisfy 0 <= start < end <= duration");
    }
};

/// Region geometry as fractions of the frame.
struct Layout {
    double face_cx, face_cy, face_ax, face_ay;
    double chest_x0, chest_x1, chest_y0, chest_y1;

    explicit Layout(int w, int h)
        : face_cx(0.55 * w), face_cy(0.21 * h), face_ax(0.28 * w), face_ay(0.19 * h), chest_x0(0.15 * w),
          chest_x1(0.82 * w), chest_y0(0.42 * h), chest_y1(0.95 * h) {}
};

struct GroundTruth {
    double fps = 0.0;
    std::size_t frame_count = 0;
    int width = 0;
    int height = 0;
    spectra::WindowPlan plan;
    std::vector<double> t_center_s;
    std::vector<double> hr_bpm;
    std::vector<double> rr_bpm;
    std::vector<std::uint8_t> motion_event_mask;
    std::vector<std::uint8_t> skin_mask;
    std::vector<std::uint8_t> chest_mask;

    bool skin(int x, int y) const { return skin_mask[static_cast<std::size_t>(y) * width + x] != 0; }
    bool chest(int x, int y) const { return chest_mask[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// Unit-peak pulse waveform with a negative second harmonic.
inline double pulse_wave(double phase) {
    static const double peak = [] {
        double best = 0.0;
        for (int i = 0; i < 200000; ++i) {
            const double p = 2.0 * std::numbers::pi * i / 200000.0;
            best = std::max(best, std::abs(std::sin(p) - 0.3 * std::sin(2.0 * p)));
        }
        return best;
    }();
    return (std::sin(phase) - 0.3 * std::sin(2.0 * phase)) / peak;
}

namespace detail {

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Sum of random plane waves with wavelengths in [lmin, lmax], scaled to the given std.
inline Image wave_texture(int w, int h, std::uint64_t seed, int waves, double lmin, double lmax, double stddev) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    struct Wave {
        double kx, ky, phase;
    };
    std::vector<Wave> ws;
    for (int i = 0; i < waves; ++i) {
        const double lambda = lmin * std::pow(lmax / lmin, u01(gen));
        const double angle = std::numbers::pi * u01(gen);
        const double k = 2.0 * std::numbers::pi / lambda;
        ws.push_back({k * std::cos(angle), k * std::sin(angle), 2.0 * std::numbers::pi * u01(gen)});
    }
    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = 0.0;
            for (const auto& wv : ws) v += std::cos(wv.kx * x + wv.ky * y + wv.phase);
            img.at(x, y) = v;
        }
    // Each unit-amplitude cosine has variance 1/2.
    const double scale = stddev / std::sqrt(0.5 * waves);
    for (double& v : img.data) v *= scale;
    return img;
}

/// Translates by (sx, sy) with bilinear weights; samples outside the grid read as zero.
inline void translate_zero(const Image& src, double sx, double sy, Image& out) {
    out.width = src.width;
    out.height = src.height;
    out.data.assign(src.data.size(), 0.0);
    const double fx = std::floor(-sx);
    const double fy = std::floor(-sy);
    const int ox = static_cast<int>(fx);
    const int oy = static_cast<int>(fy);
    const double ax = -sx - fx;
    const double ay = -sy - fy;
    const double w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay), w01 = (1 - ax) * ay, w11 = ax * ay;
    auto get = [&](int x, int y) {
        return (x < 0 || y < 0 || x >= src.width || y >= src.height) ? 0.0
                                                                      : src.data[static_cast<std::size_t>(y) * src.width + x];
    };
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            const int xs = x + ox;
            const int ys = y + oy;
            out.data[static_cast<std::size_t>(y) * src.width + x] =
                w00 * get(xs, ys) + w10 * get(xs + 1, ys) + w01 * get(xs, ys + 1) + w11 * get(xs + 1, ys + 1);
        }
}

} // namespace detail

/// Renders frames of one scene; all randomness is derived from the seed and
/// the frame index, so frames can be produced in any order.
class SceneRenderer {
public:
    static constexpr double kBackgroundDc = 50.0;
    static constexpr double kSkinDc = 140.0;
    static constexpr double kChestDc = 100.0;
    static constexpr double kSheetTransmission = 0.85;
    static constexpr double kSheetDiffusionRadius = 3.0;
    static constexpr double kSupineInPlaneFactor = 0.3;

    explicit SceneRenderer(SceneConfig cfg) : cfg_(std::move(cfg)), layout_(cfg_.width, cfg_.height) {
        cfg_.validate();
        check_layout();
        build_layers();
    }

    const SceneConfig& config() const { return cfg_; }
    const Layout& layout() const { return layout_; }
    std::size_t frame_count() const { return cfg_.frame_count(); }

    /// Horizontal body offset at frame k, summed over motion events.
    double body_offset(std::size_t k) const {
        double off = 0.0;
        for (const auto& e : cfg_.motion_events) {
            const auto [k0, k1] = event_frames(e);
            if (k1 <= k0) continue;
            const double frac = std::clamp((static_cast<double>(k) - static_cast<double>(k0) + 1.0) /
                                               static_cast<double>(k1 - k0),
                                           0.0, 1.0);
            off += e.displacement_px * frac;
        }
        return off;
    }

    std::pair<std::size_t, std::size_t> event_frames(const MotionEvent& e) const {
        return {static_cast<std::size_t>(std::lround(e.start_s * cfg_.fps)),
                static_cast<std::size_t>(std::lround(e.end_s * cfg_.fps))};
    }

    double breath_displacement(double t) const {
        return in_plane_amplitude() * std::sin(2.0 * std::numbers::pi * cfg_.rr / 60.0 * t);
    }

    double in_plane_amplitude() const {
        return cfg_.breath_amplitude * (cfg_.posture_deg >= 89.5 ? kSupineInPlaneFactor : 1.0);
    }

    /// Noise-free real-valued frame k.
    Image render_clean(std::size_t k) const {
        const double t = static_cast<double>(k) / cfg_.fps;
        const double off = body_offset(k);
        const double d = breath_displacement(t);
        const double theta = cfg_.posture_deg * std::numbers::pi / 180.0;
        const double gain = 1.0 + cfg_.pulse_amplitude * pulse_wave(2.0 * std::numbers::pi * cfg_.hr / 60.0 * t);

        Image chest_pm, chest_a, face_pm, face_a;
        detail::translate_zero(chest_pm_, off + d * std::cos(theta), d * std::sin(theta), chest_pm);
        detail::translate_zero(chest_alpha_, off + d * std::cos(theta), d * std::sin(theta), chest_a);
        if (off == 0.0) {
            face_pm = face_pm_;
            face_a = face_alpha_;
        } else {
            detail::translate_zero(face_pm_, off, 0.0, face_pm);
            detail::translate_zero(face_alpha_, off, 0.0, face_a);
        }
        Image out(cfg_.width, cfg_.height);
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            const double under = face_pm.data[i] * gain + (1.0 - face_a.data[i]) * background_.data[i];
            out.data[i] = chest_pm.data[i] + (1.0 - chest_a.data[i]) * under;
        }
        return out;
    }

    /// Frame k through optional optics, then sensor noise and quantization.
    vidio::Frame render_frame(std::size_t k, const optics::PsfKernel* psf = nullptr) const {
        Image img = render_clean(k);
        if (psf != nullptr && psf->side > 1) img = optics::convolve(img, *psf);
        if (cfg_.noise_sigma > 0.0) {
            std::mt19937_64 gen(detail::mix(cfg_.seed, 0x6e6f697365ull + k));
            std::normal_distribution<double> noise(0.0, cfg_.noise_sigma);
            for (double& v : img.data) v += noise(gen);
        }
        return vidio::quantize(img, static_cast<std::uint8_t>(cfg_.bit_depth));
    }

    vidio::VideoClip render_clip(const optics::PsfKernel* psf = nullptr) const {
        vidio::VideoClip clip;
        clip.fps = cfg_.fps;
        clip.frames.resize(frame_count());
        parallel_for(clip.frames.size(), [&](std::size_t k) { clip.frames[k] = render_frame(k, psf); });
        return clip;
    }

    GroundTruth ground_truth(const spectra::WindowPlan& plan = {}) const {
        GroundTruth gt;
        gt.fps = cfg_.fps;
        gt.frame_count = frame_count();
        gt.width = cfg_.width;
        gt.height = cfg_.height;
        gt.plan = plan;
        const std::size_t windows = plan.window_count(gt.frame_count);
        for (std::size_t w = 0; w < windows; ++w) {
            gt.t_center_s.push_back(plan.center_seconds(w, cfg_.fps));
            gt.hr_bpm.push_back(cfg_.hr);
            gt.rr_bpm.push_back(cfg_.rr);
        }
        gt.motion_event_mask.assign(gt.frame_count, 0);
        for (const auto& e : cfg_.motion_events) {
            const auto [k0, k1] = event_frames(e);
            for (std::size_t k = k0; k < std::min(k1, gt.frame_count); ++k) gt.motion_event_mask[k] = 1;
        }
        gt.skin_mask.resize(face_alpha_.data.size());
        gt.chest_mask.resize(chest_alpha_.data.size());
        for (std::size_t i = 0; i < gt.skin_mask.size(); ++i) {
            const double chest = chest_alpha_.data[i];
            gt.chest_mask[i] = chest >= 0.5 ? 1 : 0;
            gt.skin_mask[i] = face_alpha_.data[i] * (1.0 - chest) >= 0.5 ? 1 : 0;
        }
        return gt;
    }

private:
    void check_layout() const {
        double lo = 0.0, hi = 0.0, running = 0.0;
        for (const auto& e : cfg_.motion_events) {
            running += e.displacement_px;
            lo = std::min({lo, running, e.displacement_px});
            hi = std::max({hi, running, e.displacement_px});
        }
        const double margin = 2.0;
        const double breath = in_plane_amplitude();
        const auto& L = layout_;
        const double w = cfg_.width - 1;
        const double h = cfg_.height - 1;
        const bool face_ok = L.face_cx - L.face_ax + lo - margin >= 0 && L.face_cx + L.face_ax + hi + margin <= w &&
                             L.face_cy - L.face_ay - margin >= 0 && L.face_cy + L.face_ay + margin <= h;
        const bool chest_ok = L.chest_x0 + lo - breath - margin >= 0 && L.chest_x1 + hi + breath + margin <= w &&
                              L.chest_y0 - breath - margin >= 0 && L.chest_y1 + breath + margin <= h;
        if (!face_ok || !chest_ok) throw ValidationError("layout error: body region would leave the frame");
    }

    void build_layers() {
        const int w = cfg_.width;
        const int h = cfg_.height;
        const double levels = cfg_.illumination * cfg_.level_scale();
        background_ = detail::wave_texture(w, h, detail::mix(cfg_.seed, 1), 12, 8.0, 40.0, 2.0 * levels);
        Image face = detail::wave_texture(w, h, detail::mix(cfg_.seed, 2), 10, 12.0, 48.0, 5.0 * levels);
        Image chest = detail::wave_texture(w, h, detail::mix(cfg_.seed, 3), 16, 6.0, 32.0, 15.0 * levels);
        for (double& v : background_.data) v += kBackgroundDc * levels;
        for (double& v : face.data) v += kSkinDc * levels;
        for (double& v : chest.data) v += kChestDc * levels;
        if (cfg_.covered) {
            chest = optics::convolve(chest, optics::disc_psf(kSheetDiffusionRadius));
            for (double& v : chest.data) v *= kSheetTransmission;
        }

        const auto& L = layout_;
        face_alpha_ = Image(w, h);
        chest_alpha_ = Image(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double ex = (x - L.face_cx) / L.face_ax;
                const double ey = (y - L.face_cy) / L.face_ay;
                const double rho = std::hypot(ex, ey);
                const double dist = std::hypot(x - L.face_cx, y - L.face_cy);
                const double signed_dist = rho > 0.0 ? dist - dist / rho : -std::min(L.face_ax, L.face_ay);
                face_alpha_.at(x, y) = std::clamp(0.5 - signed_dist, 0.0, 1.0);
                const double inside =
                    std::min({x - L.chest_x0, L.chest_x1 - x, y - L.chest_y0, L.chest_y1 - y});
                chest_alpha_.at(x, y) = std::clamp(inside + 0.5, 0.0, 1.0);
            }
        face_pm_ = Image(w, h);
        chest_pm_ = Image(w, h);
        for (std::size_t i = 0; i < face.data.size(); ++i) {
            face_pm_.data[i] = face.data[i] * face_alpha_.data[i];
            chest_pm_.data[i] = chest.data[i] * chest_alpha_.data[i];
        }
    }

    SceneConfig cfg_;
    Layout layout_;
    Image background_;
    Image face_pm_, face_alpha_;
    Image chest_pm_, chest_alpha_;
};

inline std::pair<vidio::VideoClip, GroundTruth> render_scene(const SceneConfig& cfg,
                                                             const spectra::WindowPlan& plan = {}) {
    const SceneRenderer r(cfg);
    return {r.render_clip(), r.ground_truth(plan)};
}

// ---------------------------------------------------------------------------
// Serialization

using nlohmann::json;

/// Run-length encoding: runs alternate starting with `start`.
inline json rle_encode(const std::vector<std::uint8_t>& bits) {
    json runs = json::array();
    const std::uint8_t start = bits.empty() ? 0 : (bits.front() != 0 ? 1 : 0);
    std::uint8_t cur = start;
    std::size_t n = 0;
    for (auto b : bits) {
        const std::uint8_t v = b != 0 ? 1 : 0;
        if (v == cur) {
            ++n;
        } else {
            runs.push_back(n);
            cur = v;
            n = 1;
        }
    }
    if (!bits.empty()) runs.push_back(n);
    return {{"length", bits.size()}, {"start", start}, {"runs", runs}};
}

inline std::vector<std::uint8_t> rle_decode(const json& j) {
    const auto length = j.at("length").get<std::size_t>();
    std::uint8_t cur = j.at("start").get<std::uint8_t>() != 0 ? 1 : 0;
    std::vector<std::uint8_t> bits;
    bits.reserve(length);
    for (const auto& r : j.at("runs")) {
        bits.insert(bits.end(), r.get<std::size_t>(), cur);
        cur = cur ? 0 : 1;
    }
    if (bits.size() != length) throw FormatError("run-length mask does not match its declared length");
    return bits;
}

inline json to_json(const GroundTruth& gt) {
    return {{"fps", gt.fps},
            {"frame_count", gt.frame_count},
            {"width", gt.width},
            {"height", gt.height},
            {"window", {{"len", gt.plan.window_len}, {"hop", gt.plan.hop}, {"zero_pad_to", gt.plan.zero_pad_to}}},
            {"t_center_s", gt.t_center_s},
            {"hr_bpm", gt.hr_bpm},
            {"rr_bpm", gt.rr_bpm},
            {"motion_event_mask", rle_encode(gt.motion_event_mask)},
            {"skin_mask", rle_encode(gt.skin_mask)},
            {"chest_mask", rle_encode(gt.chest_mask)}};
}

inline GroundTruth truth_from_json(const json& j) {
    try {
        GroundTruth gt;
        gt.fps = j.at("fps").get<double>();
        gt.frame_count = j.at("frame_count").get<std::size_t>();
        gt.width = j.at("width").get<int>();
        gt.height = j.at("height").get<int>();
        gt.plan.window_len = j.at("window").at("len").get<std::size_t>();
        gt.plan.hop = j.at("window").at("hop").get<std::size_t>();
        gt.plan.zero_pad_to = j.at("window").at("zero_pad_to").get<std::size_t>();
        gt.t_center_s = j.at("t_center_s").get<std::vector<double>>();
        gt.hr_bpm = j.at("hr_bpm").get<std::vector<double>>();
        gt.rr_bpm = j.at("rr_bpm").get<std::vector<double>>();
        gt.motion_event_mask = rle_decode(j.at("motion_event_mask"));
        gt.skin_mask = rle_decode(j.at("skin_mask"));
        gt.chest_mask = rle_decode(j.at("chest_mask"));
        if (gt.hr_bpm.size() != gt.t_center_s.size() || gt.rr_bpm.size() != gt.t_center_s.size())
            throw FormatError("reference series lengths disagree");
        return gt;
    } catch (const json::exception& e) {
        throw FormatError(std::string("ground truth: ") + e.what());
    }
}

inline void write_truth(const GroundTruth& gt, const std::filesystem::path& path) {
    vidio::detail::write_atomic(path, to_json(gt).dump(1) + "\n");
}

inline GroundTruth read_truth(const std::filesystem::path& path) {
    const auto bytes = vidio::detail::read_all(path);
    try {
        return truth_from_json(json::parse(bytes.begin(), bytes.end()));
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Condition suite

struct Condition {
    bool covered = false;
    double blur_radius = 0.0;
    double posture_deg = 0.0;

    std::string label() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s-r%g-p%g", covered ? "covered" : "uncovered", blur_radius, posture_deg);
        return buf;
    }
};

struct ManifestEntry {
    std::filesystem::path clip;  // relative to the manifest directory
    std::filesystem::path truth; // relative to the manifest directory
    Condition condition;
};

struct Manifest {
    std::filesystem::path dir;
    std::vector<ManifestEntry> entries;

    std::filesystem::path clip_path(const ManifestEntry& e) const { return dir / e.clip; }
    std::filesystem::path truth_path(const ManifestEntry& e) const { return dir / e.truth; }
};

inline json to_json(const Manifest& m) {
    json arr = json::array();
    for (const auto& e : m.entries)
        arr.push_back({{"clip", e.clip.generic_string()},
                       {"truth", e.truth.generic_string()},
                       {"condition",
                        {{"covered", e.condition.covered},
                         {"blur_radius", e.condition.blur_radius},
                         {"posture_deg", e.condition.posture_deg}}}});
    return arr;
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    vidio::detail::write_atomic(path, to_json(m).dump(2) + "\n");
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    const auto bytes = vidio::detail::read_all(path);
    Manifest m;
    m.dir = path.parent_path();
    try {
        const json arr = json::parse(bytes.begin(), bytes.end());
        for (const auto& j : arr) {
            ManifestEntry e;
            e.clip = j.at("clip").get<std::string>();
            e.truth = j.at("truth").get<std::string>();
            const auto& c = j.at("condition");
            e.condition.covered = c.at("covered").get<bool>();
            e.condition.blur_radius = c.at("blur_radius").get<double>();
            e.condition.posture_deg = c.at("posture_deg").get<double>();
            m.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return m;
}

inline constexpr double kPostureAngles[] = {0.0, 60.0, 90.0};
/// Per-posture rate offsets, so pooled references have spread for correlation.
inline constexpr double kPostureHrStep = 8.0;
inline constexpr double kPostureRrStep = 3.0;

/// Scene for posture index i derived from the base configuration.
inline SceneConfig posture_config(const SceneConfig& base, std::size_t i, bool covered) {
    SceneConfig cfg = base;
    cfg.posture_deg = kPostureAngles[i];
    cfg.hr = base.hr + kPostureHrStep * static_cast<double>(i);
    cfg.rr = base.rr + kPostureRrStep * static_cast<double>(i);
    cfg.covered = covered;
    cfg.seed = detail::mix(base.seed, 100 + i);
    return cfg;
}

/// Writes {uncovered, covered} x {clear, each blur radius} x postures clips
/// with their truth files and a manifest.json into out_dir.
inline Manifest render_condition_suite(const SceneConfig& base, std::size_t postures,
                                       const std::vector<double>& blur_radii, const std::filesystem::path& out_dir,
                                       const spectra::WindowPlan& plan = {}) {
    if (postures < 1 || postures > std::size(kPostureAngles))
        throw ValidationError("postures must lie in [1, 3]");
    std::vector<double> radii{0.0};
    for (double r : blur_radii) {
        optics::disc_psf(r); // validates
        if (r > 0.0 && std::find(radii.begin(), radii.end(), r) == radii.end()) radii.push_back(r);
    }
    std::vector<SceneConfig> configs;
    for (std::size_t i = 0; i < postures; ++i)
        for (bool covered : {false, true}) configs.push_back(posture_config(base, i, covered));
    for (const auto& c : configs) SceneRenderer{c}; // validate every scene before writing

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw IoError(out_dir, "cannot create output directory");

    Manifest m;
    m.dir = out_dir;
    for (const auto& cfg : configs) {
        const SceneRenderer renderer(cfg);
        const GroundTruth gt = renderer.ground_truth(plan);
        for (double r : radii) {
            const Condition cond{cfg.covered, r, cfg.posture_deg};
            const std::string stem = "clip_" + cond.label();
            const optics::PsfKernel psf = optics::disc_psf(r);
            vidio::VideoClip clip = renderer.render_clip(&psf);
            clip.label = cond.label();
            vidio::write_clip(clip, out_dir / (stem + ".bvr"));
            write_truth(gt, out_dir / (stem + ".truth.json"));
            m.entries.push_back({stem + ".bvr", stem + ".truth.json", cond});
        }
    }
    write_manifest(m, out_dir / "manifest.json");
    return m;
}

} // namespace blurvitals::synth
