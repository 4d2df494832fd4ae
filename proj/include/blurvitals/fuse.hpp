#pragma once

// Per-window fusion: SNR heatmaps over the block grid, region-of-interest
// selection, SNR-weighted combination of local traces into a global trace,
// rate estimation and motion gating.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "spectra.hpp"

namespace blurvitals::fuse {

enum class Modality { ppg_hr, motion_rr };

struct SnrHeatmap {
    std::size_t window_index = 0;
    Modality modality = Modality::ppg_hr;
    std::vector<double> snr;
    /// Channel that produced each block's value (the chosen motion axis).
    std::vector<spectra::Source> axis;

    std::size_t size() const { return snr.size(); }
    double max() const { return snr.empty() ? spectra::kSnrFloorDb : *std::max_element(snr.begin(), snr.end()); }
};

/// Spectra of one block for one window; motion blocks carry one entry per axis.
struct BlockSpectra {
    std::vector<spectra::Spectrum> channels;
};

inline SnrHeatmap build_heatmap(std::span<const BlockSpectra> per_block, const spectra::Band& band, Modality modality,
                                std::size_t window_index = 0) {
    SnrHeatmap map;
    map.window_index = window_index;
    map.modality = modality;
    map.snr.resize(per_block.size());
    map.axis.resize(per_block.size());
    const bool harmonic = modality == Modality::ppg_hr;
    for (std::size_t b = 0; b < per_block.size(); ++b) {
        const auto& ch = per_block[b].channels;
        if (ch.empty()) throw DataError("incomplete input: block " + std::to_string(b) + " has no spectrum");
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& s : ch) {
            const double v = spectra::snr_db(s, band, harmonic);
            if (v > best) {
                best = v;
                map.axis[b] = s.source;
            }
        }
        map.snr[b] = std::max(best, spectra::kSnrFloorDb);
    }
    return map;
}

/// Up to k blocks with snr >= min_snr, best first; equal SNR goes to the lower index.
inline std::vector<std::size_t> select_roi(const SnrHeatmap& map, std::size_t k, double min_snr) {
    if (k < 1) throw ValidationError("roi k must be at least 1");
    std::vector<std::size_t> ids;
    for (std::size_t b = 0; b < map.snr.size(); ++b)
        if (map.snr[b] >= min_snr) ids.push_back(b);
    std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return map.snr[a] > map.snr[b]; });
    if (ids.size() > k) ids.resize(k);
    return ids;
}

/// Weighted mean with weights proportional to linear SNR, returned zero-mean.
inline std::optional<std::vector<double>> combine_global(std::span<const std::vector<double>> traces,
                                                         std::span<const double> snr_db) {
    if (traces.empty()) return std::nullopt;
    if (traces.size() != snr_db.size()) throw ValidationError("one weight per trace is required");
    const std::size_t n = traces.front().size();
    for (const auto& t : traces)
        if (t.size() != n) throw ValidationError("combined traces must share one length");
    // Relative to the strongest block, which keeps the linear weights finite.
    const double ref = *std::max_element(snr_db.begin(), snr_db.end());
    std::vector<double> out(n, 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const double w = std::pow(10.0, (snr_db[i] - ref) / 10.0);
        wsum += w;
        for (std::size_t j = 0; j < n; ++j) out[j] += w * traces[i][j];
    }
    double mean = 0.0;
    for (double& v : out) {
        v /= wsum;
        mean += v;
    }
    mean /= static_cast<double>(n == 0 ? 1 : n);
    for (double& v : out) v -= mean;
    return out;
}

/// Population standard deviation of the motion magnitude over one window.
inline double motion_metric(std::span<const double> dx, std::span<const double> dy) {
    if (dx.empty() || dx.size() != dy.size()) throw ValidationError("motion window must be non-empty with matching axes");
    const std::size_t n = dx.size();
    std::vector<double> mag(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mag[i] = std::hypot(dx[i], dy[i]);
        mean += mag[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double m : mag) var += (m - mean) * (m - mean);
    return std::sqrt(var / static_cast<double>(n));
}

struct GatingConfig {
    double threshold = 1.0;
    void validate() const {
        if (!(threshold > 0.0)) throw ValidationError("gate threshold must be positive");
    }
};

enum class RrSource { axis, theta };

struct FuseConfig {
    spectra::Band hr_band = spectra::kHeartBand;
    spectra::Band rr_band = spectra::kBreathBand;
    std::size_t roi_k = 10;
    double min_snr_db = 0.0;
    GatingConfig gating;
    RrSource rr_source = RrSource::axis;

    void validate(double fps) const {
        hr_band.validate(fps);
        rr_band.validate(fps);
        if (roi_k < 1) throw ValidationError("roi k must be at least 1");
        gating.validate();
    }
};

struct VitalEstimate {
    std::size_t window_index = 0;
    double t_center_s = 0.0;
    std::optional<double> hr_bpm;
    std::optional<double> rr_bpm;
    double hr_quality = spectra::kSnrFloorDb;
    double rr_quality = spectra::kSnrFloorDb;
    bool gated = false;
    double motion_intensity = 0.0;
};

/// Everything estimate_window needs for one analysis window. Per-block
/// traces are window slices; motion samples are frame aligned (sample t is
/// the displacement from frame t-1 to t). Whole-frame motion is in px/s.
struct WindowState {
    std::size_t window_index = 0;
    double t_center_s = 0.0;
    double fps = 0.0;
    spectra::WindowPlan plan;
    std::vector<std::vector<double>> ppg;
    std::vector<std::uint8_t> ppg_usable;
    std::vector<std::vector<double>> dx;
    std::vector<std::vector<double>> dy;
    std::vector<std::vector<double>> theta;
    std::vector<double> frame_dx;
    std::vector<double> frame_dy;
};

struct WindowDiagnostics {
    SnrHeatmap ppg_map;
    SnrHeatmap motion_map;
    std::vector<std::size_t> ppg_roi;
    std::vector<std::size_t> motion_roi;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

} // namespace detail

inline VitalEstimate estimate_window(const WindowState& st, const FuseConfig& cfg,
                                     WindowDiagnostics* diag = nullptr) {
    using spectra::Source;
    const std::size_t blocks = st.ppg.size();
    VitalEstimate est;
    est.window_index = st.window_index;
    est.t_center_s = st.t_center_s;
    est.motion_intensity = motion_metric(st.frame_dx, st.frame_dy);
    est.gated = est.motion_intensity > cfg.gating.threshold;

    // Heart rate from PPG.
    std::vector<BlockSpectra> ppg_spec(blocks);
    for (std::size_t b = 0; b < blocks; ++b)
        ppg_spec[b].channels.push_back(spectra::window_spectrum(st.ppg[b], st.plan, st.fps, Source::ppg, st.window_index));
    SnrHeatmap ppg_map = build_heatmap(ppg_spec, cfg.hr_band, Modality::ppg_hr, st.window_index);
    for (std::size_t b = 0; b < blocks; ++b)
        if (!st.ppg_usable.empty() && !st.ppg_usable[b]) ppg_map.snr[b] = spectra::kSnrFloorDb;
    const auto ppg_roi = select_roi(ppg_map, cfg.roi_k, cfg.min_snr_db);
    if (!ppg_roi.empty()) {
        std::vector<std::vector<double>> sel;
        std::vector<double> w;
        for (auto b : ppg_roi) {
            sel.push_back(st.ppg[b]);
            w.push_back(ppg_map.snr[b]);
        }
        const auto global = combine_global(sel, w);
        const auto spec = spectra::window_spectrum(*global, st.plan, st.fps, Source::ppg, st.window_index);
        est.hr_quality = spectra::snr_db(spec, cfg.hr_band, true);
        if (!est.gated) est.hr_bpm = spectra::band_peak(spec, cfg.hr_band).bpm;
    }

    // Respiratory rate from block motion.
    std::vector<BlockSpectra> motion_spec(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        auto& ch = motion_spec[b].channels;
        if (cfg.rr_source == RrSource::theta) {
            ch.push_back(spectra::window_spectrum(st.theta[b], st.plan, st.fps, Source::motion_theta, st.window_index));
        } else {
            ch.push_back(spectra::window_spectrum(st.dx[b], st.plan, st.fps, Source::motion_dx, st.window_index));
            ch.push_back(spectra::window_spectrum(st.dy[b], st.plan, st.fps, Source::motion_dy, st.window_index));
        }
    }
    const SnrHeatmap motion_map = build_heatmap(motion_spec, cfg.rr_band, Modality::motion_rr, st.window_index);
    const auto motion_roi = select_roi(motion_map, cfg.roi_k, cfg.min_snr_db);
    if (!motion_roi.empty()) {
        auto pick = [&](std::size_t b) -> const std::vector<double>& {
            switch (motion_map.axis[b]) {
            case Source::motion_dy: return st.dy[b];
            case Source::motion_theta: return st.theta[b];
            default: return st.dx[b];
            }
        };
        // Axis traces of a rigidly moving chest can be in antiphase; align
        // every selected trace with the strongest one before averaging.
        const auto& ref = pick(motion_roi.front());
        std::vector<std::vector<double>> sel;
        std::vector<double> w;
        for (auto b : motion_roi) {
            std::vector<double> t = pick(b);
            const double mt = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
            for (double& v : t) v -= mt;
            if (detail::dot(t, ref) < 0.0)
                for (double& v : t) v = -v;
            sel.push_back(std::move(t));
            w.push_back(motion_map.snr[b]);
        }
        const auto global = combine_global(sel, w);
        const auto spec = spectra::window_spectrum(*global, st.plan, st.fps, Source::motion_dx, st.window_index);
        est.rr_quality = spectra::snr_db(spec, cfg.rr_band, false);
        if (!est.gated) est.rr_bpm = spectra::band_peak(spec, cfg.rr_band).bpm;
    }

    if (diag != nullptr) {
        diag->ppg_map = std::move(ppg_map);
        diag->motion_map = motion_map;
        diag->ppg_roi = ppg_roi;
        diag->motion_roi = motion_roi;
    }
    return est;
}

} // namespace blurvitals::fuse
