#pragma once

// Single-channel PPG traces: per-block spatial means over time, with
// per-window AC/DC normalization and linear detrending.

#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "spectra.hpp"
#include "vidio.hpp"

namespace blurvitals::ppg {

/// Windows whose mean intensity falls below this are too dark to normalize.
inline constexpr double kMinUsableMean = 1.0;

struct PpgTrace {
    std::size_t block_id = 0;
    std::vector<double> c_raw;
    /// Normalized over consecutive non-overlapping segments of window_len frames.
    std::vector<double> c_norm;
    /// One flag per segment of c_norm.
    std::vector<std::uint8_t> segment_usable;
};

/// Removes the least-squares line from `v` in place.
inline void detrend(std::span<double> v) {
    const std::size_t n = v.size();
    if (n < 2) {
        for (double& x : v) x = 0.0;
        return;
    }
    const double tm = 0.5 * static_cast<double>(n - 1);
    double vm = 0.0;
    for (double x : v) vm += x;
    vm /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) - tm;
        num += t * (v[i] - vm);
        den += t * t;
    }
    const double slope = num / den;
    for (std::size_t i = 0; i < n; ++i) v[i] -= vm + slope * (static_cast<double>(i) - tm);
}

/// (x - mean) / mean followed by linear detrend. Returns false, with an
/// all-zero output, when the window is too dark.
inline bool normalize_window(std::span<const double> raw, std::span<double> out) {
    double mean = 0.0;
    for (double v : raw) mean += v;
    mean /= static_cast<double>(raw.size());
    if (!(mean >= kMinUsableMean)) {
        for (double& v : out) v = 0.0;
        return false;
    }
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mean) / mean;
    detrend(out);
    return true;
}

inline std::vector<double> normalize_window(std::span<const double> raw, bool* usable = nullptr) {
    std::vector<double> out(raw.size());
    const bool ok = normalize_window(raw, std::span<double>(out));
    if (usable != nullptr) *usable = ok;
    return out;
}

inline PpgTrace extract_trace(const vidio::VideoClip& clip, const grid::Block& block,
                              std::size_t window_len = spectra::WindowPlan{}.window_len) {
    if (clip.empty()) throw DataError("clip has no frames");
    if (window_len == 0) throw ValidationError("window length must be positive");
    PpgTrace t;
    t.c_raw.resize(clip.size());
    for (std::size_t i = 0; i < clip.size(); ++i) t.c_raw[i] = grid::block_mean(clip.frames[i], block);
    t.c_norm.resize(clip.size());
    for (std::size_t s = 0; s < clip.size(); s += window_len) {
        const std::size_t n = std::min(window_len, clip.size() - s);
        const bool ok = normalize_window(std::span<const double>(t.c_raw).subspan(s, n),
                                         std::span<double>(t.c_norm).subspan(s, n));
        t.segment_usable.push_back(ok ? 1 : 0);
    }
    return t;
}

/// Raw block means for every block of the grid: result[block][frame].
inline std::vector<std::vector<double>> block_means(const vidio::VideoClip& clip, const grid::BlockGrid& g) {
    std::vector<std::vector<double>> out(g.size(), std::vector<double>(clip.size()));
    parallel_for(clip.size(), [&](std::size_t t) {
        const grid::IntegralImage ii(clip.frames[t]);
        for (std::size_t b = 0; b < g.size(); ++b) out[b][t] = ii.mean(g.blocks[b]);
    });
    return out;
}

} // namespace blurvitals::ppg
