#pragma once

// End-to-end clip processing: grid -> block means and block motion ->
// per-window fusion -> one VitalEstimate per analysis window.

#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"
#include "flow.hpp"
#include "fuse.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "ppg.hpp"
#include "spectra.hpp"
#include "vidio.hpp"

namespace blurvitals {

struct PipelineConfig {
    std::vector<int> scales = grid::default_scales();
    double window_sec = 10.0;
    double hop_sec = 1.0;
    fuse::FuseConfig fuse;
    flow::FlowOptions flow;

    spectra::WindowPlan plan(double fps) const { return spectra::make_plan(window_sec, hop_sec, fps); }

    void validate(double fps) const {
        if (scales.empty()) throw ValidationError("scale list is empty");
        for (int s : scales)
            if (s < 4) throw ValidationError("block scale " + std::to_string(s) + " is below the 4 px minimum");
        plan(fps);
        fuse.validate(fps);
        if (!(flow.max_displacement > 0.0)) throw ValidationError("max displacement must be positive");
    }
};

struct ClipAnalysis {
    grid::BlockGrid grid;
    spectra::WindowPlan plan;
    std::vector<fuse::VitalEstimate> estimates;
    /// Filled only when requested.
    std::vector<fuse::WindowDiagnostics> diagnostics;
};

inline ClipAnalysis analyze_clip(const vidio::VideoClip& clip, const PipelineConfig& cfg, bool keep_diagnostics = false) {
    cfg.validate(clip.fps);
    ClipAnalysis out;
    out.plan = cfg.plan(clip.fps);
    if (clip.size() < out.plan.window_len)
        throw InsufficientDataError("clip of " + std::to_string(clip.size()) + " frames is shorter than one analysis window",
                                    out.plan.window_len);
    out.grid = grid::build_grid(static_cast<int>(clip.width()), static_cast<int>(clip.height()), cfg.scales);
    const auto& g = out.grid;
    const auto means = ppg::block_means(clip, g);
    const auto field = flow::trace_grid(clip, g, cfg.flow);

    const std::size_t windows = out.plan.window_count(clip.size());
    out.estimates.resize(windows);
    if (keep_diagnostics) out.diagnostics.resize(windows);
    const std::size_t len = out.plan.window_len;

    parallel_for(windows, [&](std::size_t w) {
        const std::size_t start = out.plan.start(w);
        fuse::WindowState st;
        st.window_index = w;
        st.t_center_s = out.plan.center_seconds(w, clip.fps);
        st.fps = clip.fps;
        st.plan = out.plan;
        st.ppg.resize(g.size());
        st.ppg_usable.resize(g.size());
        st.dx.resize(g.size());
        st.dy.resize(g.size());
        st.theta.resize(g.size());
        // Motion sample t (t >= 1) is pair (t-1, t); sample 0 has no predecessor.
        auto aligned = [&](const std::vector<double>& pairs, double scale) {
            std::vector<double> v(len);
            for (std::size_t i = 0; i < len; ++i) {
                const std::size_t t = start + i;
                v[i] = t == 0 ? 0.0 : scale * pairs[t - 1];
            }
            return v;
        };
        for (std::size_t b = 0; b < g.size(); ++b) {
            st.ppg[b].resize(len);
            st.ppg_usable[b] = ppg::normalize_window(std::span<const double>(means[b]).subspan(start, len),
                                                     std::span<double>(st.ppg[b]))
                                   ? 1
                                   : 0;
            st.dx[b] = aligned(field.blocks[b].dx, 1.0);
            st.dy[b] = aligned(field.blocks[b].dy, 1.0);
            if (cfg.fuse.rr_source == fuse::RrSource::theta) st.theta[b] = aligned(field.blocks[b].theta, 1.0);
        }
        st.frame_dx = aligned(field.whole_frame.dx, clip.fps);
        st.frame_dy = aligned(field.whole_frame.dy, clip.fps);
        out.estimates[w] = fuse::estimate_window(st, cfg.fuse, keep_diagnostics ? &out.diagnostics[w] : nullptr);
    });
    return out;
}

inline std::vector<fuse::VitalEstimate> process_clip(const vidio::VideoClip& clip, const PipelineConfig& cfg) {
    return analyze_clip(clip, cfg).estimates;
}

} // namespace blurvitals
